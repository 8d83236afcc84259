//! SVG rendering of projections and diagrams.
//!
//! Loops render from their actual geometry; the under-strand is broken
//! around each undercrossing passage, as in the usual diagram pictures.
//! Abstract diagrams (no geometry) get a deterministic spring layout of
//! the subdivided 4-valent map. Output is byte-stable for equal inputs.

use crate::curve::FourierLoop;
use crate::diagram::{Diagram, Role};
use crate::genericity::DoublePoint;
use std::f64::consts::TAU;
use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct SvgStyle {
    /// Canvas width/height in pixels.
    pub size: f64,
    pub stroke_width: f64,
    /// Under-strand gap, as a fraction of the drawing extent.
    pub gap_fraction: f64,
    /// Points sampled along a loop.
    pub samples: usize,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            size: 480.0,
            stroke_width: 2.0,
            gap_fraction: 0.03,
            samples: 720,
        }
    }
}

fn fmt2(v: f64) -> String {
    // Fixed precision keeps output byte-identical across runs.
    format!("{v:.2}")
}

struct Mapper {
    min_x: f64,
    min_y: f64,
    scale: f64,
    size: f64,
    pad: f64,
}

impl Mapper {
    fn new(points: impl Iterator<Item = (f64, f64)>, size: f64) -> Self {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (x, y) in points {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
        let pad = 0.05 * size;
        Self {
            min_x,
            min_y,
            scale: (size - 2.0 * pad) / span,
            size,
            pad,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        // SVG y points down.
        (
            self.pad + (x - self.min_x) * self.scale,
            self.size - self.pad - (y - self.min_y) * self.scale,
        )
    }
}

fn svg_header(out: &mut String, style: &SvgStyle) {
    let s = fmt2(style.size);
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" \
         viewBox=\"0 0 {s} {s}\">\n"
    );
    let _ = write!(
        out,
        "<g fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linecap=\"round\">\n",
        fmt2(style.stroke_width)
    );
}

fn svg_footer(out: &mut String) {
    out.push_str("</g>\n</svg>\n");
}

fn path_from(points: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let cmd = if i == 0 { "M" } else { "L" };
        let _ = write!(d, "{cmd}{} {} ", fmt2(*x), fmt2(*y));
    }
    if closed {
        d.push('Z');
    }
    format!("<path d=\"{}\"/>\n", d.trim_end())
}

/// Render a validated loop's projection. Under-strands are broken around
/// each double point's lower branch, so a diagram with C crossings has C
/// gaps.
pub fn render_loop(loop_: &FourierLoop, double_points: &[DoublePoint], style: &SvgStyle) -> String {
    let n = style.samples.max(16);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let p = loop_.eval(TAU * i as f64 / n as f64).project();
            (p.x, p.y)
        })
        .collect();
    let mapper = Mapper::new(pts.iter().copied(), style.size);

    // Extent of the drawing in curve units, for the gap size.
    let extent = (style.size - 2.0 * mapper.pad) / mapper.scale;
    let gap_len = style.gap_fraction * extent;

    // Parameter intervals to cut out around each under passage.
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for dp in double_points {
        let u_under = if dp.z_gap > 0.0 { dp.u2 } else { dp.u1 };
        let speed = loop_.derivative(u_under, 1).project().norm().max(1e-9);
        let half = (gap_len / speed).min(TAU / 16.0);
        cuts.push((u_under - half, u_under + half));
    }

    let mut out = String::new();
    svg_header(&mut out, style);
    if cuts.is_empty() {
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| mapper.map(x, y)).collect();
        out.push_str(&path_from(&mapped, true));
    } else {
        // Kept intervals between consecutive cuts, walking the circle once.
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = cuts.len();
        for k in 0..m {
            let start = cuts[k].1;
            let end = if k + 1 < m {
                cuts[k + 1].0
            } else {
                cuts[0].0 + TAU
            };
            if end <= start {
                continue;
            }
            let steps = ((end - start) / TAU * n as f64).ceil().max(2.0) as usize;
            let seg: Vec<(f64, f64)> = (0..=steps)
                .map(|i| {
                    let u = start + (end - start) * i as f64 / steps as f64;
                    let p = loop_.eval(u).project();
                    mapper.map(p.x, p.y)
                })
                .collect();
            out.push_str(&path_from(&seg, false));
        }
    }
    svg_footer(&mut out);
    out
}

/// Render an abstract diagram with a deterministic spring layout of the
/// subdivided map. Best effort: the layout is readable for small diagrams
/// but carries no planarity certificate.
pub fn render_diagram(diagram: &Diagram, style: &SvgStyle) -> String {
    let c = diagram.crossings();
    let mut out = String::new();
    if c == 0 {
        svg_header(&mut out, style);
        let r = 0.4 * style.size;
        let cx = 0.5 * style.size;
        let _ = write!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
            fmt2(cx),
            fmt2(cx),
            fmt2(r)
        );
        svg_footer(&mut out);
        return out;
    }

    const SUBS: usize = 3;
    let code = diagram.code();
    let n_pass = code.len();
    // Nodes: crossings first, then SUBS interior nodes per diagram edge.
    let node_count = c + n_pass * SUBS;
    let sub_node = |edge: usize, k: usize| c + edge * SUBS + k;

    // Springs along the knot: crossing -> subs -> next crossing.
    let mut springs: Vec<(usize, usize)> = Vec::new();
    for e in 0..n_pass {
        let a = code[e].crossing;
        let b = code[(e + 1) % n_pass].crossing;
        let chain: Vec<usize> = std::iter::once(a)
            .chain((0..SUBS).map(|k| sub_node(e, k)))
            .chain(std::iter::once(b))
            .collect();
        for w in chain.windows(2) {
            springs.push((w[0], w[1]));
        }
    }

    // Initial positions around a circle in traversal order; a crossing
    // sits at its first passage's angle.
    let mut pos = vec![(0.0f64, 0.0f64); node_count];
    let total = n_pass * (SUBS + 1);
    let angle_of = |slot: usize| TAU * slot as f64 / total as f64;
    let mut first_seen = vec![usize::MAX; c];
    for (i, p) in code.iter().enumerate() {
        if first_seen[p.crossing] == usize::MAX {
            first_seen[p.crossing] = i;
        }
    }
    for cid in 0..c {
        let a = angle_of(first_seen[cid] * (SUBS + 1));
        pos[cid] = (a.cos(), a.sin());
    }
    for e in 0..n_pass {
        for k in 0..SUBS {
            let a = angle_of(e * (SUBS + 1) + k + 1);
            pos[sub_node(e, k)] = (a.cos(), a.sin());
        }
    }

    // Plain spring relaxation with all-pairs repulsion; fixed step and
    // iteration count keep the output deterministic.
    let rest = 2.0 * (TAU / total as f64).sin();
    for _ in 0..300 {
        let mut force = vec![(0.0f64, 0.0f64); node_count];
        for i in 0..node_count {
            for j in i + 1..node_count {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let d2 = (dx * dx + dy * dy).max(1e-6);
                let f = 0.02 * rest * rest / d2;
                let d = d2.sqrt();
                force[i].0 += f * dx / d;
                force[i].1 += f * dy / d;
                force[j].0 -= f * dx / d;
                force[j].1 -= f * dy / d;
            }
        }
        for &(a, b) in &springs {
            let dx = pos[b].0 - pos[a].0;
            let dy = pos[b].1 - pos[a].1;
            let d = (dx * dx + dy * dy).sqrt().max(1e-9);
            let f = 0.5 * (d - rest) / d;
            force[a].0 += f * dx;
            force[a].1 += f * dy;
            force[b].0 -= f * dx;
            force[b].1 -= f * dy;
        }
        for i in 0..node_count {
            pos[i].0 += force[i].0.clamp(-0.1, 0.1);
            pos[i].1 += force[i].1.clamp(-0.1, 0.1);
        }
    }

    let mapper = Mapper::new(pos.iter().copied(), style.size);
    let gap = style.gap_fraction * style.size * 1.5;
    svg_header(&mut out, style);
    for e in 0..n_pass {
        let tail = code[e];
        let head = code[(e + 1) % n_pass];
        let mut pline: Vec<(f64, f64)> = Vec::with_capacity(SUBS + 2);
        pline.push(mapper.map(pos[tail.crossing].0, pos[tail.crossing].1));
        for k in 0..SUBS {
            let p = pos[sub_node(e, k)];
            pline.push(mapper.map(p.0, p.1));
        }
        pline.push(mapper.map(pos[head.crossing].0, pos[head.crossing].1));
        // Break the strand near an endpoint where it passes under.
        if tail.role == Role::Under {
            trim_polyline(&mut pline, gap, true);
        }
        if head.role == Role::Under {
            trim_polyline(&mut pline, gap, false);
        }
        out.push_str(&path_from(&pline, false));
    }
    svg_footer(&mut out);
    out
}

/// Shorten a polyline by `dist` from the front (or back).
fn trim_polyline(points: &mut Vec<(f64, f64)>, dist: f64, front: bool) {
    if !front {
        points.reverse();
    }
    let mut remaining = dist;
    while points.len() >= 2 {
        let (x0, y0) = points[0];
        let (x1, y1) = points[1];
        let seg = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
        if seg > remaining {
            let t = remaining / seg;
            points[0] = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            break;
        }
        remaining -= seg;
        points.remove(0);
    }
    if !front {
        points.reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CoordSeries;
    use crate::genericity::{find_double_points, GenericityConfig};

    fn circle() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(1).with(1, 1.0, 0.0),
            CoordSeries::zero(1).with(1, 0.0, 1.0),
            CoordSeries::zero(1),
        )
        .unwrap()
    }

    fn trefoil() -> FourierLoop {
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0).with(2, 0.0, 2.0),
            CoordSeries::zero(3).with(1, 1.0, 0.0).with(2, -2.0, 0.0),
            CoordSeries::zero(3).with(3, 0.0, -1.0),
        )
        .unwrap()
    }

    #[test]
    fn circle_renders_single_closed_path() {
        let svg = render_loop(&circle(), &[], &SvgStyle::default());
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains('Z'));
    }

    #[test]
    fn trefoil_has_three_gaps() {
        let l = trefoil();
        let dps = find_double_points(&l, &GenericityConfig::default()).unwrap();
        let svg = render_loop(&l, &dps, &SvgStyle::default());
        // Three cuts split the closed curve into three open paths.
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(!svg.contains('Z'));
    }

    #[test]
    fn rendering_is_deterministic() {
        let l = trefoil();
        let dps = find_double_points(&l, &GenericityConfig::default()).unwrap();
        let a = render_loop(&l, &dps, &SvgStyle::default());
        let b = render_loop(&l, &dps, &SvgStyle::default());
        assert_eq!(a, b);

        let d = Diagram::parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+").unwrap();
        let a = render_diagram(&d, &SvgStyle::default());
        let b = render_diagram(&d, &SvgStyle::default());
        assert_eq!(a, b);
        assert!(a.matches("<path").count() >= 6);
    }

    #[test]
    fn unknot_diagram_renders_circle() {
        let svg = render_diagram(&Diagram::unknot(), &SvgStyle::default());
        assert!(svg.contains("<circle"));
    }
}
