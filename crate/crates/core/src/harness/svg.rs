//! Plain SVG charts. Coordinates are printed with two decimals so equal
//! inputs give equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use super::stats::{BoxStats, GroupSummary};
use crate::error::{Error, Result};
use crate::fit::Algorithm;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const TRUTH_COLOR: &str = "#d62728";
const FIT_COLORS: [&str; 10] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
    "#ff7f0e", "#393b79",
];

fn algorithm_color(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Gibbs => "#4c72b0",
        Algorithm::Vb => "#dd8452",
    }
}

/// One box in a grouped box plot.
#[derive(Debug, Clone)]
pub struct BoxGlyph {
    pub x: usize,
    pub algorithm: Algorithm,
    pub stats: BoxStats,
}

struct Scale {
    lo: f64,
    hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64) -> Self {
        if hi - lo < 1e-12 {
            let pad = if lo.abs() > 1e-12 {
                lo.abs() * 0.1
            } else {
                1.0
            };
            Scale {
                lo: lo - pad,
                hi: hi + pad,
            }
        } else {
            let pad = (hi - lo) * 0.05;
            Scale {
                lo: lo - pad,
                hi: hi + pad,
            }
        }
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + h * (1.0 - (v - self.lo) / (self.hi - self.lo))
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0
    );
}

fn axes(out: &mut String, scale: &Scale, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for i in 0..=5 {
        let v = scale.lo + (scale.hi - scale.lo) * i as f64 / 5.0;
        let y = scale.y(v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text class="ylabel" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    let x = WIDTH - RIGHT + 20.0;
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<g class="legend"><rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{color}"/><text x="{:.2}" y="{:.2}">{label}</text></g>"#,
            y - 10.0,
            x + 18.0,
            y
        );
    }
}

/// Grouped box plot: one slot per distinct `x`, one box per algorithm in it.
pub fn render_boxplot(
    glyphs: &[BoxGlyph],
    title: &str,
    x_label: &str,
    y_label: &str,
) -> Result<String> {
    if glyphs.is_empty() {
        return Err(Error::Input("box plot needs at least one group".into()));
    }
    let mut xs: Vec<usize> = glyphs.iter().map(|g| g.x).collect();
    xs.sort_unstable();
    xs.dedup();
    let mut algos: Vec<Algorithm> = Algorithm::ALL
        .into_iter()
        .filter(|a| glyphs.iter().any(|g| g.algorithm == *a))
        .collect();
    algos.dedup();

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for g in glyphs {
        let s = &g.stats;
        for v in [s.whisker_low, s.whisker_high].iter().chain(&s.outliers) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let scale = Scale::new(lo, hi);

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &scale, x_label, y_label);

    let slot = (WIDTH - LEFT - RIGHT) / xs.len() as f64;
    let box_w = (slot * 0.7 / algos.len() as f64).min(40.0);
    for (i, x) in xs.iter().enumerate() {
        let center = LEFT + slot * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text class="xtick" x="{center:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#,
            HEIGHT - BOTTOM + 18.0
        );
        for (j, a) in algos.iter().enumerate() {
            let Some(g) = glyphs.iter().find(|g| g.x == *x && g.algorithm == *a) else {
                continue;
            };
            let s = &g.stats;
            let bx = center + (j as f64 - algos.len() as f64 / 2.0) * box_w;
            let mid = bx + box_w / 2.0;
            let color = algorithm_color(*a);
            let (yq1, yq3) = (scale.y(s.q1), scale.y(s.q3));
            let _ = writeln!(
                out,
                r#"<line class="whisker" x1="{mid:.2}" y1="{:.2}" x2="{mid:.2}" y2="{yq1:.2}" stroke="black"/><line class="whisker" x1="{mid:.2}" y1="{yq3:.2}" x2="{mid:.2}" y2="{:.2}" stroke="black"/>"#,
                scale.y(s.whisker_low),
                scale.y(s.whisker_high)
            );
            for w in [s.whisker_low, s.whisker_high] {
                let _ = writeln!(
                    out,
                    r#"<line class="cap" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                    bx + box_w * 0.25,
                    bx + box_w * 0.75,
                    y = scale.y(w)
                );
            }
            let _ = writeln!(
                out,
                r#"<rect class="box" x="{bx:.2}" y="{yq3:.2}" width="{box_w:.2}" height="{:.2}" fill="{color}" fill-opacity="0.7" stroke="black"/>"#,
                (yq1 - yq3).max(0.5)
            );
            let _ = writeln!(
                out,
                r#"<line class="median" x1="{bx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="2"/>"#,
                bx + box_w,
                y = scale.y(s.median)
            );
            for o in &s.outliers {
                let _ = writeln!(
                    out,
                    r#"<circle class="outlier" cx="{mid:.2}" cy="{:.2}" r="3" fill="none" stroke="{color}"/>"#,
                    scale.y(*o)
                );
            }
        }
    }
    let entries: Vec<(String, &str)> = algos
        .iter()
        .map(|a| (a.to_string(), algorithm_color(*a)))
        .collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Box plot of average KLD per M and algorithm.
pub fn emit_boxplot(summaries: &[GroupSummary], path: &Path) -> Result<()> {
    let glyphs: Vec<BoxGlyph> = summaries
        .iter()
        .map(|s| BoxGlyph {
            x: s.m,
            algorithm: s.algorithm,
            stats: s.stats(),
        })
        .collect();
    let svg = render_boxplot(
        &glyphs,
        "Average KLD per corpus",
        "M (documents per corpus)",
        "average KLD",
    )?;
    std::fs::write(path, svg)?;
    Ok(())
}

/// True topics as red curves with the aligned extracted topics overlaid.
pub fn render_wordtopic_plot(
    truth_phi: &Array2<f64>,
    fit_phi: &Array2<f64>,
    alignment: &[usize],
    average_kld: f64,
) -> Result<String> {
    let (k, v) = truth_phi.dim();
    if fit_phi.ncols() != v {
        return Err(Error::Input("truth and fit vocabularies differ".into()));
    }
    if alignment.len() != k || alignment.iter().any(|&j| j >= fit_phi.nrows()) {
        return Err(Error::Input(
            "alignment does not match the topic matrices".into(),
        ));
    }
    let hi = truth_phi
        .iter()
        .chain(fit_phi.iter())
        .fold(0.0f64, |m, &x| m.max(x));
    let scale = Scale {
        lo: 0.0,
        hi: if hi > 0.0 { hi * 1.05 } else { 1.0 },
    };
    let span = (WIDTH - LEFT - RIGHT) / (v.max(2) - 1) as f64;
    let px = |w: usize| LEFT + span * w as f64;
    let polyline =
        |out: &mut String, row: ndarray::ArrayView1<f64>, class: &str, color: &str, extra: &str| {
            let pts: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(w, &p)| format!("{:.2},{:.2}", px(w), scale.y(p)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="{class}" fill="none" stroke="{color}"{extra} points="{}"/>"#,
                pts.join(" ")
            );
        };

    let mut out = String::new();
    header(&mut out, &format!("KLD = {average_kld:.2}"));
    axes(&mut out, &scale, "word index", "probability");
    for (w, label) in [(0, 0), (v - 1, v - 1)] {
        let _ = writeln!(
            out,
            r#"<text class="xtick" x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            px(w),
            HEIGHT - BOTTOM + 18.0
        );
    }
    for t in 0..k {
        polyline(
            &mut out,
            truth_phi.row(t),
            "truth",
            TRUTH_COLOR,
            r#" stroke-width="2.5""#,
        );
    }
    for (t, &j) in alignment.iter().enumerate() {
        let color = FIT_COLORS[t % FIT_COLORS.len()];
        polyline(
            &mut out,
            fit_phi.row(j),
            "fit",
            color,
            r#" stroke-width="1.2" stroke-dasharray="4 2""#,
        );
    }
    legend(
        &mut out,
        &[
            ("truth".to_string(), TRUTH_COLOR),
            ("extracted".to_string(), FIT_COLORS[0]),
        ],
    );
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_wordtopic_plot(
    truth_phi: &Array2<f64>,
    fit_phi: &Array2<f64>,
    alignment: &[usize],
    average_kld: f64,
    path: &Path,
) -> Result<()> {
    let svg = render_wordtopic_plot(truth_phi, fit_phi, alignment, average_kld)?;
    std::fs::write(path, svg)?;
    Ok(())
}
