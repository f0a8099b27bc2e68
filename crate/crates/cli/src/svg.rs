//! SVG rendering of a Laguerre diagram.

use std::fmt::Write as _;

use sdot::LaguerreDiagram;

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9",
    "#bc80bd", "#ccebc5", "#ffed6f",
];

/// Palette slot for a site; a fixed integer hash so that neighbouring indices
/// do not get neighbouring colours.
pub fn color(site: usize) -> &'static str {
    let mut h = site as u64;
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
    h ^= h >> 31;
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// One `<g class="cell">` per site (possibly empty) followed by a group of
/// site markers. The y axis is flipped so the picture is in math orientation.
pub fn render(diagram: &LaguerreDiagram, bbox: sdot::geom::BoundingBox) -> String {
    let (mx, my) = (0.02 * bbox.width(), 0.02 * bbox.height());
    let (x0, y0) = (bbox.min.x - mx, -(bbox.max.y + my));
    let (w, h) = (bbox.width() + 2.0 * mx, bbox.height() + 2.0 * my);
    let radius = 0.005 * bbox.diameter();
    let seam = 0.001 * bbox.diameter();

    let mut paths = vec![String::new(); diagram.site_count()];
    for f in diagram.fragments() {
        let d = &mut paths[f.site];
        for (k, v) in f.polygon.vertices().iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if k == 0 { "M" } else { "L" }, num(v.x), num(-v.y));
        }
        d.push_str("Z ");
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    for (j, d) in paths.iter().enumerate() {
        let c = color(j);
        let _ = writeln!(
            s,
            "<g class=\"cell\" id=\"cell-{j}\" fill=\"{c}\" stroke=\"{c}\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
            num(seam)
        );
        if !d.is_empty() {
            let _ = writeln!(s, "<path d=\"{}\"/>", d.trim_end());
        }
        s.push_str("</g>\n");
    }
    s.push_str("<g class=\"sites\" fill=\"#000000\">\n");
    for p in diagram.sites() {
        let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", num(p.x), num(-p.y), num(radius));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
