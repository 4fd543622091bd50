use std::fmt::Write;

use super::certificate::{CoveringCertificate, Interval};
use crate::rational::{self, Rational};
use crate::value_group::Value;

const PANEL: f64 = 220.0;
const MARGIN: f64 = 30.0;

/// Triangle and segment vertices with exact coordinates as strings.
pub fn render_csv(cert: &CoveringCertificate) -> String {
    let mut out = String::from("leaf,cell,kind,vertex,u,v,scale\n");
    for leaf in &cert.leaves {
        for (k, t) in leaf.triangles.iter().enumerate() {
            for (j, p) in t.vertices.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{k},triangle,{j},{},{},{}",
                    leaf.id,
                    rational::format_rational(&p.0),
                    rational::format_rational(&p.1),
                    t.scale
                );
            }
        }
        for (k, s) in leaf.segments.iter().enumerate() {
            for (j, p) in [&s.start, &s.end].into_iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{k},segment,{j},{},{},{}",
                    leaf.id,
                    rational::format_rational(&p.0),
                    rational::format_rational(&p.1),
                    s.scale
                );
            }
        }
    }
    out
}

fn f(x: &Rational) -> f64 {
    rational::to_f64(x)
}

/// `log_r v` as a float, for drawing only.
fn log_r(v: &Value, r: &Value) -> f64 {
    v.ln_f64() / r.ln_f64()
}

/// One panel per leaf (region outline and triangles) and one strip per split
/// (chart ranges in `log_r` units with the overlap shaded).
///
/// Coordinates are rounded to `f64`; the certificate is the exact record.
pub fn render_svg(cert: &CoveringCertificate) -> String {
    let r = cert.model.r();
    let leaves: Vec<_> = cert.leaves.iter().filter(|l| l.region.is_some()).collect();
    let panels = leaves.len().max(1) as f64;
    let strip_h = 40.0 * cert.splits.len() as f64;
    let width = panels * (PANEL + MARGIN) + MARGIN;
    let height = PANEL + 3.0 * MARGIN + strip_h + 20.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="16">display only: float rendering of exact coordinates (u = log_r|t_1|, v = log_r|x_0|)</text>"#
    );
    for (k, leaf) in leaves.iter().enumerate() {
        let region = leaf.region.as_ref().expect("filtered");
        let x0 = MARGIN + k as f64 * (PANEL + MARGIN);
        let y0 = 2.0 * MARGIN;
        let extent = [f(&region.width), f(&region.left), f(&region.right)]
            .into_iter()
            .fold(1e-9, f64::max);
        let unit = PANEL / extent;
        let px = |u: f64| x0 + u * unit;
        let py = |v: f64| y0 + PANEL - v * unit;
        let _ = writeln!(
            svg,
            r#"<text x="{x0:.2}" y="{:.2}">{} a={} b={}</text>"#,
            y0 - 6.0,
            leaf.id,
            leaf.a.as_ref().map(rational::format_rational).unwrap_or_default(),
            leaf.b.as_ref().map(rational::format_rational).unwrap_or_default()
        );
        let (w, l, rr) = (f(&region.width), f(&region.left), f(&region.right));
        let _ = writeln!(
            svg,
            r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#eef3fb" stroke="#1f3b73" stroke-width="1.5"/>"##,
            px(0.0), py(0.0), px(w), py(0.0), px(w), py(rr), px(0.0), py(l)
        );
        for t in &leaf.triangles {
            let pts: Vec<String> = t
                .vertices
                .iter()
                .map(|p| format!("{:.2},{:.2}", px(f(&p.0)), py(f(&p.1))))
                .collect();
            let _ = writeln!(
                svg,
                r##"<polygon points="{}" fill="none" stroke="#7a8fb8" stroke-width="0.6"/>"##,
                pts.join(" ")
            );
        }
        for s in &leaf.segments {
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#7a8fb8" stroke-width="3"/>"##,
                px(f(&s.start.0)), py(f(&s.start.1)), px(f(&s.end.0)), py(f(&s.end.1))
            );
        }
    }
    let strip_y = 3.0 * MARGIN + PANEL;
    let strip_w = width - 2.0 * MARGIN;
    for (k, split) in cert.splits.iter().enumerate() {
        let y = strip_y + 40.0 * k as f64;
        let Some(parent) = &split.parent_interval else {
            let _ = writeln!(
                svg,
                r#"<text x="{MARGIN}" y="{:.2}">{}: pigeonhole split, s = {}</text>"#,
                y + 12.0,
                split.id,
                split.s
            );
            continue;
        };
        let span = log_r(&parent.lo, r).max(1e-9);
        // larger radii to the left, as in log_r units
        let sx = |v: &Value| MARGIN + log_r(v, r) / span * strip_w;
        let bar = |iv: &Interval, dy: f64, colour: &str| {
            format!(
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="8" fill="{colour}" fill-opacity="0.6"/>"#,
                sx(&iv.hi),
                y + dy,
                (sx(&iv.lo) - sx(&iv.hi)).max(1.0)
            )
        };
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="{:.2}">{} on |{}|: s = {}, q = {}</text>"#,
            y,
            split.id,
            split.axis.as_deref().unwrap_or("?"),
            split.s,
            rational::format_rational(&split.q)
        );
        for (i, chart) in split.charts.iter().enumerate() {
            let colour = if i % 2 == 0 { "#4c78a8" } else { "#f58518" };
            let _ = writeln!(svg, "{}", bar(&chart.interval, 6.0 + 9.0 * i as f64, colour));
        }
        if let Some(ov) = &split.overlap {
            let _ = writeln!(svg, "{}", bar(ov, 24.0, "#54a24b"));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering_engine::{build_covering, certify, AnnuliModel};

    #[test]
    fn csv_and_svg_for_two_annuli() {
        let v = |s: &str| s.parse::<Value>().unwrap();
        let model = AnnuliModel::two_annuli(v("1/2"), v("1/3"), v("1/2")).unwrap();
        let cert = certify(&build_covering(&model).unwrap()).unwrap();
        let csv = render_csv(&cert);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "leaf,cell,kind,vertex,u,v,scale");
        assert_eq!(lines.len(), 1 + 4 * 3);
        assert!(lines.contains(&"r.0,0,triangle,0,0,0,1"));
        let svg = render_svg(&cert);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("display only"));
        assert_eq!(svg.matches("<polygon").count(), 2 + 4);
    }
}
