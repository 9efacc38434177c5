//! Minimal SVG line plots of a CSV table.

use std::fmt::Write;

use crate::output::Table;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Columns that are drawn: everything except the x column, a leading curve
/// column and standard-error columns.
fn series_columns(t: &Table, x: usize, group: Option<usize>) -> Vec<usize> {
    (0..t.columns.len()).filter(|&i| i != x && Some(i) != group && !t.columns[i].ends_with("_se")).collect()
}

/// Render `t`. With three or more columns whose first column repeats, the
/// first column selects separate curves and the second is the x axis.
pub fn render_svg(t: &Table, title: &str) -> String {
    let grouped = t.columns.len() >= 3 && t.rows.windows(2).any(|w| w[0][0] == w[1][0]);
    let (x, group) = if grouped { (1, Some(0)) } else { (0, None) };
    let cols = series_columns(t, x, group);

    let finite = |v: f64| v.is_finite();
    let xs: Vec<f64> = t.rows.iter().map(|r| r[x]).filter(|v| finite(*v)).collect();
    let ys: Vec<f64> = t.rows.iter().flat_map(|r| cols.iter().map(move |&c| r[c])).filter(|v| finite(*v)).collect();
    let bounds = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < hi {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 1.0, lo + 1.0)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = if xs.is_empty() { (0.0, 1.0) } else { bounds(&xs) };
    let (y0, y1) = if ys.is_empty() { (0.0, 1.0) } else { bounds(&ys) };
    let px = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {} H{} M{PAD} {} V{PAD}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#, px(v), H - PAD + 15.0, fmt(v));
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, py(v) + 4.0, fmt(v));
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&t.columns[x]));

    let groups: Vec<f64> = match group {
        Some(g) => {
            let mut v: Vec<f64> = Vec::new();
            for r in &t.rows {
                if !v.contains(&r[g]) {
                    v.push(r[g]);
                }
            }
            v
        }
        None => vec![f64::NAN],
    };
    let mut k = 0;
    for gv in &groups {
        for &c in &cols {
            let color = COLORS[k % COLORS.len()];
            let mut d = String::new();
            for r in t.rows.iter().filter(|r| group.is_none_or(|g| r[g] == *gv)) {
                if finite(r[x]) && finite(r[c]) {
                    let _ = write!(d, "{}{:.2} {:.2}", if d.is_empty() { "M" } else { " L" }, px(r[x]), py(r[c]));
                }
            }
            if d.is_empty() {
                continue;
            }
            let dash = if t.columns[c].starts_with("mc") { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" fill="none" stroke-width="1.5"{dash}/>"#);
            let label = match group {
                Some(g) => format!("{} ({} = {})", t.columns[c], t.columns[g], fmt(*gv)),
                None => t.columns[c].clone(),
            };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                W - PAD - 200.0,
                PAD + 12.0 * k as f64,
                escape(&label)
            );
            k += 1;
        }
    }
    s.push_str("</svg>\n");
    s
}

fn fmt(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouped_table_draws_one_path_per_curve() {
        let mut t = Table::new(&["psi_dB", "Pm_dB", "analytic", "mc_mean", "mc_se"]);
        for c in [0.0, 5.0] {
            for x in [0.0, 10.0, 20.0] {
                t.push(vec![c, x, x + c, x + c + 0.1, 0.01]);
            }
        }
        let svg = render_svg(&t, "t");
        assert_eq!(svg.matches("<path d=\"M").count(), 1 + 4);
        assert!(svg.ends_with("</svg>\n"));
    }
}
