//! Report directories: CSV tables at full precision and SVG line plots.

use super::{ExperimentReport, LimitedDataTable};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), num)
}

fn pieces(list: &[(f64, f64)]) -> String {
    list.iter().map(|(l, r)| format!("{}:{}", num(*l), num(*r))).collect::<Vec<_>>().join(";")
}

/// `report.csv`, `errors.csv`, `runs/run_<i>.csv`, `fig_<name>.svg`, and for
/// the plateau study `plateaus.csv` and `partition.csv`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir.join("runs"))?;

    let mut s = String::from("method,alpha,runs,mean_relative_error,variance,flagged\n");
    for m in &report.summaries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            m.method,
            opt_num(m.alpha),
            report.runs.len(),
            num(m.mean_relative_error),
            num(m.variance),
            m.flagged
        );
    }
    fs::write(dir.join("report.csv"), s)?;

    let mut s = String::from("run,seed,sigma,method,relative_error,residual_norm,iterations,status\n");
    for r in &report.runs {
        for m in &r.methods {
            let seed = r.seed.map_or_else(|| "none".to_string(), |v| v.to_string());
            let _ = writeln!(
                s,
                "{},{seed},{},{},{},{},{},{}",
                r.index,
                num(r.sigma),
                m.method,
                num(m.relative_error),
                num(m.residual_norm),
                m.iterations,
                m.status.name()
            );
        }
    }
    fs::write(dir.join("errors.csv"), s)?;

    for r in &report.runs {
        let mut s = String::from("x,rho0");
        if report.projected.is_some() {
            s.push_str(",Prho0");
        }
        for m in &r.methods {
            let _ = write!(s, ",{}", m.method);
        }
        s.push('\n');
        for (k, x) in report.nodes.iter().enumerate() {
            let _ = write!(s, "{},{}", num(*x), num(report.rho0[k]));
            if let Some(p) = &report.projected {
                let _ = write!(s, ",{}", num(p[k]));
            }
            for m in &r.methods {
                let _ = write!(s, ",{}", num(m.solution[k]));
            }
            s.push('\n');
        }
        fs::write(dir.join("runs").join(format!("run_{}.csv", r.index)), s)?;
    }

    if let Some(part) = &report.partition {
        let mut f = io::BufWriter::new(fs::File::create(dir.join("partition.csv"))?);
        part.write_csv(&mut f)?;
        let mut s = String::from("cell,subintervals,p_value,projected");
        for m in &report.summaries {
            let _ = write!(s, ",{}", m.method);
        }
        s.push('\n');
        for row in &report.plateaus {
            let _ = write!(s, "{},{},{},{}", row.cell, pieces(&row.pieces), num(row.p_value), num(row.projected));
            for v in &row.solution_averages {
                let _ = write!(s, ",{}", num(*v));
            }
            s.push('\n');
        }
        fs::write(dir.join("plateaus.csv"), s)?;
    }

    let mut plot = SvgPlot::new(&report.name);
    plot.series("rho0", &report.nodes, &report.rho0);
    if let Some(p) = &report.projected {
        plot.series("P rho0", &report.nodes, p);
    }
    if let Some(first) = report.runs.first() {
        for m in &first.methods {
            plot.series(m.method.name(), &report.nodes, &m.solution);
        }
    }
    fs::write(dir.join(format!("fig_{}.svg", svg_name(&report.name))), plot.render())
}

/// `report.csv` with one row per window and method, `errors.csv`,
/// `runs/run_<i>.csv` holding every window's solution of run `i`, and
/// `fig_<name>.svg` with the run-0 solutions.
pub fn write_limited_data_report(table: &LimitedDataTable, name: &str, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir.join("runs"))?;
    let mut s = String::from("lambda_lo,lambda_hi,method,alpha,runs,mean_relative_error,variance\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.range[0]),
            num(r.range[1]),
            r.method,
            opt_num(r.alpha),
            r.errors.len(),
            num(r.mean_relative_error),
            num(r.variance)
        );
    }
    fs::write(dir.join("report.csv"), s)?;

    let mut s = String::from("run,seed,lambda_lo,lambda_hi,method,relative_error\n");
    for rep in &table.reports {
        let range = rep_range(table, rep);
        for r in &rep.runs {
            for m in &r.methods {
                let seed = r.seed.map_or_else(|| "none".to_string(), |v| v.to_string());
                let _ = writeln!(s, "{},{seed},{},{},{},{}", r.index, range.0, range.1, m.method, num(m.relative_error));
            }
        }
    }
    fs::write(dir.join("errors.csv"), s)?;

    let Some(first) = table.reports.first() else {
        return Ok(());
    };
    let columns: Vec<String> = table
        .reports
        .iter()
        .flat_map(|rep| {
            let range = rep_range(table, rep);
            rep.summaries.iter().map(move |m| format!("{}_{}_{}", m.method, range.0, range.1))
        })
        .collect();
    for run in 0..first.runs.len() {
        let mut s = format!("x,rho0,{}\n", columns.join(","));
        for (k, x) in first.nodes.iter().enumerate() {
            let _ = write!(s, "{},{}", num(*x), num(first.rho0[k]));
            for rep in &table.reports {
                for m in &rep.runs[run].methods {
                    let _ = write!(s, ",{}", num(m.solution[k]));
                }
            }
            s.push('\n');
        }
        fs::write(dir.join("runs").join(format!("run_{run}.csv")), s)?;
    }

    let mut plot = SvgPlot::new(name);
    plot.series("rho0", &first.nodes, &first.rho0);
    let mut col = columns.iter();
    for rep in &table.reports {
        for m in &rep.runs[0].methods {
            plot.series(col.next().unwrap(), &first.nodes, &m.solution);
        }
    }
    fs::write(dir.join(format!("fig_{}.svg", svg_name(name))), plot.render())
}

fn rep_range(table: &LimitedDataTable, rep: &ExperimentReport) -> (String, String) {
    let i = table.reports.iter().position(|r| std::ptr::eq(r, rep)).unwrap();
    let per = table.rows.len() / table.reports.len();
    let r = table.rows[i * per].range;
    (num(r[0]), num(r[1]))
}

fn svg_name(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Deterministic multi-series polyline plot.
pub struct SvgPlot {
    title: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl SvgPlot {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;

    pub fn new(title: &str) -> Self {
        Self {
            title: title.to_string(),
            series: Vec::new(),
        }
    }

    pub fn series(&mut self, label: &str, xs: &[f64], ys: &[f64]) -> &mut Self {
        let pts = xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (*x, *y)).collect();
        self.series.push((label.to_string(), pts));
        self
    }

    pub fn render(&self) -> String {
        let all = self.series.iter().flat_map(|(_, p)| p.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 < x1) {
            (x0, x1) = (0.0, 1.0);
        }
        if !(y0 < y1) {
            (y0, y1) = if y0.is_finite() { (y0 - 1.0, y0 + 1.0) } else { (0.0, 1.0) };
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let sx = |x: f64| Self::M + (x - x0) / (x1 - x0) * (Self::W - 2.0 * Self::M);
        let sy = |y: f64| Self::H - Self::M - (y - y0) / (y1 - y0) * (Self::H - 2.0 * Self::M);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = Self::W,
            h = Self::H
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            Self::W - 2.0 * Self::M,
            Self::H - 2.0 * Self::M,
            m = Self::M
        );
        let _ = writeln!(s, r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#, Self::W / 2.0, escape(&self.title));
        for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
            let _ = writeln!(s, r#"<text x="{}" y="{y:.2}" font-size="10" text-anchor="end">{v:.3}</text>"#, Self::M - 4.0);
        }
        for (v, x) in [(x0, sx(x0)), (x1, sx(x1))] {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" font-size="10" text-anchor="middle">{v:.3}</text>"#, Self::H - Self::M + 14.0);
        }
        for (i, (label, pts)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
            let ly = Self::M + 14.0 + 14.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#,
                Self::W - Self::M - 120.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
