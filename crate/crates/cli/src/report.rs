//! Measured-versus-analytic comparison and small SVG line plots.

use bootlab::asymptotics::{invert_pc, pc_terms};
use bootlab::lattice::NeighbourhoodRule;
use bootlab::mc::{find_pc, PcResult, PcSearch};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub log_l: f64,
    pub measured: f64,
    pub lo: f64,
    pub hi: f64,
    pub capped: bool,
    pub one_term: f64,
    pub two_term: f64,
    pub three_term: f64,
    pub inverted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub b: u32,
    pub rows: Vec<ComparisonRow>,
    pub searches: Vec<PcResult>,
}

/// Analytic columns for a lattice of side `l` under the `(1,b)` rule.
pub fn analytic_row(l: usize, b: u32, measured: &PcResult) -> bootlab::Result<ComparisonRow> {
    let log_l = (l as f64).ln();
    let terms = pc_terms(log_l, b)?;
    // The fixed point is only defined once ln L is large enough for the
    // iteration to stay positive.
    let inverted = invert_pc(log_l, 0.0).unwrap_or(f64::NAN);
    Ok(ComparisonRow {
        l,
        log_l,
        measured: measured.p_c,
        lo: measured.lo,
        hi: measured.hi,
        capped: measured.capped,
        one_term: terms.one_term(),
        two_term: terms.two_term(),
        three_term: terms.three_term(),
        inverted,
    })
}

/// Runs `find_pc` for every side length and tabulates it against the
/// one-, two- and three-term expansions and the inverted equation.
pub fn comparison_report(sizes: &[usize], rule: &NeighbourhoodRule, template: &PcSearch) -> bootlab::Result<ComparisonReport> {
    let b = rule.anisotropic_b().ok_or_else(|| {
        bootlab::Error::InvalidParameter("comparison needs an anisotropic (1,b) rule".into())
    })?;
    let mut rows = Vec::new();
    let mut searches = Vec::new();
    for &l in sizes {
        let search = PcSearch {
            l,
            rule: rule.clone(),
            ..template.clone()
        };
        let res = find_pc(&search)?;
        rows.push(analytic_row(l, b, &res)?);
        searches.push(res);
    }
    Ok(ComparisonReport { b, rows, searches })
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("L,log_L,measured_pc,bracket_lo,bracket_hi,capped,one_term,two_term,three_term,invert_pc\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.l, r.log_l, r.measured, r.lo, r.hi, r.capped, r.one_term, r.two_term, r.three_term, r.inverted
            ));
        }
        s
    }

    pub fn to_svg(&self) -> String {
        let col = |f: fn(&ComparisonRow) -> f64| -> Vec<(f64, f64)> {
            self.rows.iter().map(|r| (r.log_l, f(r))).filter(|p| p.1.is_finite()).collect()
        };
        line_plot(
            "critical probability: measured vs expansions",
            "ln L",
            "p",
            &[
                ("measured", col(|r| r.measured)),
                ("one term", col(|r| r.one_term)),
                ("two terms", col(|r| r.two_term)),
                ("three terms", col(|r| r.three_term)),
                ("inverted", col(|r| r.inverted)),
            ],
        )
    }
}

impl ComparisonRow {
    pub fn second_order_negative(&self) -> bool {
        self.two_term < 0.0
    }

    /// The three-term value misses the measurement by more than the
    /// one-term value does.
    pub fn third_farther_than_first(&self) -> bool {
        (self.three_term - self.measured).abs() > (self.one_term - self.measured).abs()
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// A deterministic SVG line chart with a legend.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        w / 2.0
    );
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"#000\"/>\n",
        h - m,
        w - m,
        h - m,
        h - m
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            sx(xv),
            h - m + 16.0,
            fmt_tick(xv),
            m - 4.0,
            sy(yv) + 4.0,
            fmt_tick(yv)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>\n<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{ylabel}</text>\n",
        w / 2.0,
        h - 16.0,
        h / 2.0,
        h / 2.0
    ));
    for (i, (name, data)) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        if !data.is_empty() {
            let path: Vec<String> = data.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                path.join(" ")
            ));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{c}\">{name}</text>\n",
            w - m - 110.0,
            m + 14.0 * i as f64
        ));
    }
    s.push_str("</svg>\n");
    s
}
