//! SVG drawings of expanded supertiles.

use std::fmt::Write;

use fusion_lab::engine::ConcretePatch;
use fusion_lab::Scalar;

const PALETTE: &[&str] = &[
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

/// Fill colour for piece type `i`, stable across runs.
pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Prints `v · scale` in user units. Integers print without a fraction;
/// anything else uses the shortest decimal that round-trips as `f64`.
fn coord(v: &Scalar, scale: &Scalar) -> String {
    let s = v * scale;
    match s.to_rational() {
        Some(r) if r.is_integer() => r.numer().to_string(),
        _ => format!("{}", s.to_f64()),
    }
}

/// One `<rect class="tile">` per piece plus a legend naming each type.
/// In 1-D the strip is one scale unit tall; in 2-D the y axis points up.
pub fn svg(patch: &ConcretePatch, names: &[String], scale: &Scalar) -> String {
    let (x0, y0, x1, y1) = patch.bounding_box();
    let (x0, y0, x1, y1) = (
        patch.to_scalar(x0),
        patch.to_scalar(y0),
        patch.to_scalar(x1),
        patch.to_scalar(y1),
    );
    let line = patch.dimension() == 1;
    let height = if line { Scalar::from(1) } else { &y1 - &y0 };
    let width = &x1 - &x0;
    let legend_row = Scalar::from(1);
    let legend_top = &height + &Scalar::ratio(1, 2);
    let total_h = &legend_top + &legend_row;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = coord(&width, scale),
        h = coord(&total_h, scale),
    );
    let _ = writeln!(
        out,
        r##"<g class="tiles" stroke="#222222" stroke-width="1">"##
    );
    for p in patch.placements() {
        let (w, h) = patch.extents[p.piece];
        let w = patch.to_scalar(w);
        let h = if line {
            Scalar::from(1)
        } else {
            patch.to_scalar(h)
        };
        let x = &patch.to_scalar(p.x) - &x0;
        let y = if line {
            Scalar::from(0)
        } else {
            &(&y1 - &patch.to_scalar(p.y)) - &h
        };
        let _ = writeln!(
            out,
            r#"<rect class="tile" data-type="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            names[p.piece],
            coord(&x, scale),
            coord(&y, scale),
            coord(&w, scale),
            coord(&h, scale),
            color(p.piece),
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<g class="legend" font-family="sans-serif" font-size="{}">"#,
        coord(&Scalar::ratio(1, 2), scale)
    );
    let swatch = Scalar::ratio(1, 2);
    for (i, name) in names.iter().enumerate() {
        let x = Scalar::from(2 * i as i64);
        let text_x = &x + &Scalar::ratio(3, 4);
        let text_y = &legend_top + &Scalar::ratio(1, 2);
        let _ = writeln!(
            out,
            r#"<rect class="swatch" x="{}" y="{}" width="{s}" height="{s}" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            coord(&x, scale),
            coord(&legend_top, scale),
            color(i),
            coord(&text_x, scale),
            coord(&text_y, scale),
            escape(name),
            s = coord(&swatch, scale),
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
