//! `measurements.csv`: `# key=value` header lines, then `lambda,D,sigma`.

use multispec::MeasurementSet;
use std::fmt::Write as _;

pub fn render(set: &MeasurementSet, base_seed: u64) -> String {
    let mut s = format!("# sigma={:e}\n# seed={base_seed}\n", set.sigma());
    match set.seed() {
        Some(seed) => {
            let _ = writeln!(s, "# stream_seed={seed}");
        }
        None => s.push_str("# stream_seed=none\n"),
    }
    s.push_str("lambda,D,sigma\n");
    for (l, d) in set.lambdas().iter().zip(set.values()) {
        let _ = writeln!(s, "{l:e},{d:e},{:e}", set.sigma());
    }
    s
}

/// Errors name the 1-based line of the offending record.
pub fn parse(text: &str) -> Result<MeasurementSet, String> {
    let mut sigma = None;
    let mut stream_seed = None;
    let mut body_start = 0;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.strip_prefix('#') else {
            body_start = i;
            break;
        };
        body_start = i + 1;
        let Some((key, value)) = rest.trim().split_once('=') else {
            return Err(format!("line {}: expected `# key=value`", i + 1));
        };
        let value = value.trim();
        match key.trim() {
            "sigma" => sigma = Some(value.parse::<f64>().map_err(|e| format!("line {}: sigma: {e}", i + 1))?),
            "seed" => {}
            "stream_seed" if value == "none" => {}
            "stream_seed" => {
                stream_seed = Some(value.parse::<u64>().map_err(|e| format!("line {}: stream_seed: {e}", i + 1))?)
            }
            other => return Err(format!("line {}: unknown header key {other:?}", i + 1)),
        }
    }
    let body: String = text.lines().skip(body_start).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| format!("line {}: {e}", body_start + 1))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["lambda", "D", "sigma"] {
        return Err(format!("line {}: expected header `lambda,D,sigma`", body_start + 1));
    }
    let (mut lambdas, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let line = body_start + i + 2;
        let (l, d, s) = record.map_err(|e| format!("line {line}: {e}"))?;
        if let Some(h) = sigma {
            if s != h {
                return Err(format!("line {line}: sigma {s:e} differs from header {h:e}"));
            }
        }
        sigma.get_or_insert(s);
        lambdas.push(l);
        values.push(d);
    }
    if lambdas.is_empty() {
        return Err("no measurement rows".into());
    }
    MeasurementSet::new(lambdas, values, sigma.unwrap_or(0.0), stream_seed).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let set = MeasurementSet::new(vec![0.1, 0.5, 0.9], vec![0.3, 1.0 / 3.0, -2e-17], 0.01, Some(42)).unwrap();
        let text = render(&set, 7);
        let back = parse(&text).unwrap();
        assert_eq!(back.lambdas(), set.lambdas());
        assert_eq!(back.values(), set.values());
        assert_eq!(back.sigma(), 0.01);
        assert_eq!(back.seed(), Some(42));
    }

    #[test]
    fn schema_errors_carry_lines() {
        let e = parse("# sigma=0\nlambda,D,sigma\n0.1,1,0\n0.2,x,0\n").unwrap_err();
        assert!(e.starts_with("line 4"), "{e}");
        assert!(parse("lambda,D\n0.1,1\n").unwrap_err().starts_with("line 1"));
        assert!(parse("# colour=red\n").unwrap_err().starts_with("line 1"));
        assert!(parse("lambda,D,sigma\n1.5,1,0\n").is_err());
        assert!(parse("lambda,D,sigma\n").is_err());
    }
}
