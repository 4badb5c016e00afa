//! Deterministic SVG rendering of simulation snapshots.

use aoc_core::density::DensityField;
use aoc_core::geometry::{ConvexPolygon, FrameTransform, Point};
use aoc_core::sim::Snapshot;
use std::fmt::Write;

/// Which frame a snapshot is drawn in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameChoice {
    #[default]
    Global,
    Robot(usize),
}

impl FrameChoice {
    /// `global` or `robot<id>`, for file names.
    pub fn tag(&self) -> String {
        match self {
            FrameChoice::Global => "global".into(),
            FrameChoice::Robot(i) => format!("robot{i}"),
        }
    }
}

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    "#86bcb6", "#d37295",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Canvas {
    out: String,
    min: Point,
    max: Point,
    /// Stroke width and marker size, in scene units.
    unit: f64,
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

impl Canvas {
    fn new(bounds: &[Point]) -> Canvas {
        let (mut min, mut max) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in bounds {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        if !min.is_finite() || !max.is_finite() {
            min = Point::new(-1.0, -1.0);
            max = Point::new(1.0, 1.0);
        }
        let span = (max.x - min.x).max(max.y - min.y).max(1e-6);
        let pad = 0.1 * span;
        let min = Point::new(min.x - pad, min.y - pad);
        let max = Point::new(max.x + pad, max.y + pad);
        let unit = span / 200.0;
        let mut out = String::new();
        // y is flipped so +y points up; viewBox is in flipped coordinates.
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="800" viewBox="{} {} {} {}" preserveAspectRatio="xMidYMid meet">"#,
            num(min.x),
            num(-max.y),
            num(max.x - min.x),
            num(max.y - min.y)
        )
        .unwrap();
        Canvas { out, min, max, unit }
    }

    fn xy(&self, p: Point) -> String {
        format!("{},{}", num(p.x), num(-p.y))
    }

    fn polygon(&mut self, poly: &ConvexPolygon, fill: &str, opacity: f64, stroke: &str, dashed: bool) {
        if poly.is_empty() {
            return;
        }
        let pts: Vec<String> = poly.vertices().iter().map(|&p| self.xy(p)).collect();
        let dash = if dashed { format!(r#" stroke-dasharray="{} {}""#, num(3.0 * self.unit), num(2.0 * self.unit)) } else { String::new() };
        writeln!(
            self.out,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity:.2}" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            pts.join(" "),
            num(self.unit)
        )
        .unwrap();
    }

    fn robot(&mut self, p: Point, fill: &str, label: usize) {
        writeln!(
            self.out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" stroke="black" stroke-width="{}"/>"#,
            num(p.x),
            num(-p.y),
            num(3.0 * self.unit),
            num(0.5 * self.unit)
        )
        .unwrap();
        writeln!(
            self.out,
            r#"<text x="{}" y="{}" font-size="{}" font-family="monospace">{label}</text>"#,
            num(p.x + 4.0 * self.unit),
            num(-p.y - 4.0 * self.unit),
            num(8.0 * self.unit)
        )
        .unwrap();
    }

    fn cross(&mut self, p: Point, color: &str) {
        let s = 5.0 * self.unit;
        for (a, b) in [(Point::new(-s, -s), Point::new(s, s)), (Point::new(-s, s), Point::new(s, -s))] {
            writeln!(
                self.out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{}"/>"#,
                num(p.x + a.x),
                num(-(p.y + a.y)),
                num(p.x + b.x),
                num(-(p.y + b.y)),
                num(self.unit)
            )
            .unwrap();
        }
    }

    fn contours(&mut self, density: &DensityField, time: f64, to_frame: &FrameTransform) {
        let (Some(c), Some(sigma)) = (density.center(time), density.sigma()) else {
            return;
        };
        let c = to_frame.apply(c);
        for k in 1..=3 {
            writeln!(
                self.out,
                r##"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="#555555" stroke-width="{}" stroke-dasharray="{} {}"/>"##,
                num(c.x),
                num(-c.y),
                num(k as f64 * sigma),
                num(0.5 * self.unit),
                num(2.0 * self.unit),
                num(2.0 * self.unit)
            )
            .unwrap();
        }
    }

    fn caption(&mut self, text: &str) {
        writeln!(
            self.out,
            r#"<text x="{}" y="{}" font-size="{}" font-family="monospace">{text}</text>"#,
            num(self.min.x + 2.0 * self.unit),
            num(-self.max.y + 10.0 * self.unit),
            num(8.0 * self.unit)
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Renders a snapshot. Output depends only on the snapshot and frame.
pub fn render_svg(snapshot: &Snapshot, frame: FrameChoice) -> String {
    match frame {
        FrameChoice::Global => render_global(snapshot),
        FrameChoice::Robot(id) => render_robot(snapshot, id),
    }
}

fn render_global(s: &Snapshot) -> String {
    let mut c = Canvas::new(s.workspace.vertices());
    c.polygon(&s.workspace, "none", 0.0, "black", false);
    for (i, cell) in s.cells.iter().enumerate() {
        c.polygon(cell, color(i), 0.35, "#333333", false);
    }
    c.contours(&s.density, s.time, &FrameTransform::identity());
    c.cross(s.anchor, "black");
    for (i, &p) in s.positions.iter().enumerate() {
        c.robot(p, color(i), i);
    }
    c.caption(&format!("step {} t={:.2}s global", s.step, s.time));
    c.finish()
}

fn render_robot(s: &Snapshot, id: usize) -> String {
    let Some(view) = s.robots.get(id) else {
        let mut c = Canvas::new(&[]);
        c.caption(&format!("robot {id} not present"));
        return c.finish();
    };
    let to_local = view.frame.inverse();
    let mut c = Canvas::new(view.workspace.vertices());
    c.polygon(&view.workspace, "none", 0.0, "black", false);
    // Context: the true tessellation mapped into this robot's frame.
    for (i, cell) in s.cells.iter().enumerate() {
        if i != id {
            c.polygon(&cell.transformed(&to_local), color(i), 0.12, "#999999", true);
        }
    }
    c.polygon(&view.cell, color(id), 0.45, "#222222", false);
    c.contours(&s.density, s.time, &to_local);
    c.cross(to_local.apply(s.anchor), "#888888");
    c.cross(view.anchor_estimate, "black");
    for (i, &p) in s.positions.iter().enumerate() {
        if i != id {
            c.robot(to_local.apply(p), color(i), i);
        }
    }
    c.robot(view.position, color(id), id);
    c.caption(&format!("step {} t={:.2}s robot {id}", s.step, s.time));
    c.finish()
}
