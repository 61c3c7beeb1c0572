//! SVG output.
//!
//! Lattice coordinates are scaled by [`RenderStyle::scale`] and flipped so
//! that `y` grows upward. Output depends only on its inputs, so identical
//! values and styles give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fold::{Box2, LatticeConfiguration, Point};
use crate::gadgets::{GadgetFragment, GadgetKind};
use crate::model::{Color, FixedAngleChain};
use crate::poly::Polyline;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("scale must be at least 1")]
    Scale,
    #[error("{expected} colors for {got} points")]
    ColorCount { expected: usize, got: usize },
    #[error("nothing to draw")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    /// Pixels per lattice unit.
    pub scale: u32,
    pub margin: u32,
    pub edge_color: String,
    pub h_color: String,
    pub p_color: String,
    pub palette: BTreeMap<GadgetKind, String>,
    pub stroke_width: f64,
    pub vertex_radius: f64,
    /// Dots on every vertex, not just colored ones.
    pub show_vertices: bool,
    pub show_labels: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        let palette = [
            (GadgetKind::Frame, "#444444"),
            (GadgetKind::Insulation, "#2a9d8f"),
            (GadgetKind::Choice, "#e76f51"),
            (GadgetKind::Hook, "#8e44ad"),
            (GadgetKind::ChoiceChain, "#f4a261"),
            (GadgetKind::TopSheath, "#264653"),
            (GadgetKind::BottomSheath, "#3d5a80"),
            (GadgetKind::Variable, "#e9c46a"),
        ]
        .into_iter()
        .map(|(k, c)| (k, c.to_string()))
        .collect();
        RenderStyle {
            scale: 20,
            margin: 10,
            edge_color: "#000000".into(),
            h_color: "#d62728".into(),
            p_color: "#1f5fbf".into(),
            palette,
            stroke_width: 2.0,
            vertex_radius: 3.0,
            show_vertices: false,
            show_labels: false,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.scale == 0 {
            return Err(RenderError::Scale);
        }
        Ok(())
    }

    fn kind_color(&self, kind: GadgetKind) -> &str {
        self.palette.get(&kind).map_or(self.edge_color.as_str(), String::as_str)
    }
}

/// Maps lattice points into one SVG canvas.
struct Canvas<'a> {
    style: &'a RenderStyle,
    bounds: Box2,
    body: String,
}

impl<'a> Canvas<'a> {
    fn new(style: &'a RenderStyle, bounds: Box2) -> Result<Self, RenderError> {
        style.validate()?;
        Ok(Canvas { style, bounds, body: String::new() })
    }

    fn xy(&self, p: Point) -> (i128, i128) {
        let s = i128::from(self.style.scale);
        let m = i128::from(self.style.margin);
        (i128::from(p.x - self.bounds.min.x) * s + m, i128::from(self.bounds.max.y - p.y) * s + m)
    }

    fn line(&mut self, a: Point, b: Point, color: &str) {
        let ((x1, y1), (x2, y2)) = (self.xy(a), self.xy(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" stroke-width="{}" stroke-linecap="round"/>"#,
            self.style.stroke_width
        );
    }

    fn dot(&mut self, p: Point, color: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(self.body, r#"<circle cx="{x}" cy="{y}" r="{}" fill="{color}"/>"#, self.style.vertex_radius);
    }

    fn label(&mut self, p: Point, text: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="{}">{}</text>"#,
            x + 4,
            y - 4,
            (self.style.scale / 2).max(8),
            escape(text)
        );
    }

    fn finish(self) -> String {
        let s = i128::from(self.style.scale);
        let m = i128::from(self.style.margin);
        let w = i128::from(self.bounds.width()) * s + 2 * m;
        let h = i128::from(self.bounds.height()) * s + 2 * m;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One stroke per unit edge. Vertices are dotted red/blue when `chain`
/// carries colors.
pub fn render_configuration(
    chain: Option<&FixedAngleChain>,
    config: &LatticeConfiguration,
    style: &RenderStyle,
) -> Result<String, RenderError> {
    let bounds = config.bounding_box().ok_or(RenderError::Empty)?;
    let mut cv = Canvas::new(style, bounds)?;
    for w in config.points.windows(2) {
        cv.line(w[0], w[1], &style.edge_color);
    }
    let verts = config.vertices();
    let colors = chain.and_then(|c| c.colors());
    if let Some(c) = colors {
        if c.len() != verts.len() {
            return Err(RenderError::ColorCount { expected: c.len(), got: verts.len() });
        }
    }
    for (i, &p) in verts.iter().enumerate() {
        match colors.map(|c| c[i]) {
            Some(Color::H) => cv.dot(p, &style.h_color),
            Some(Color::P) => cv.dot(p, &style.p_color),
            None if style.show_vertices => cv.dot(p, &style.edge_color),
            None => {}
        }
        if style.show_labels {
            cv.label(p, &format!("v{i}"));
        }
    }
    Ok(cv.finish())
}

/// One stroke per straight segment, for chains too long to draw edge by
/// edge. `h_ends` marks both endpoints as H.
pub fn render_polyline(pl: &Polyline, h_ends: bool, style: &RenderStyle) -> Result<String, RenderError> {
    let bounds = pl.bounding_box().ok_or(RenderError::Empty)?;
    let mut cv = Canvas::new(style, bounds)?;
    draw_polyline(&mut cv, pl, &style.edge_color);
    if h_ends {
        cv.dot(pl.points[0], &style.h_color);
        cv.dot(*pl.points.last().unwrap(), &style.h_color);
    }
    if style.show_labels {
        cv.label(pl.points[0], "start");
    }
    Ok(cv.finish())
}

fn draw_polyline(cv: &mut Canvas<'_>, pl: &Polyline, color: &str) {
    for i in 0..pl.segment_count() {
        let (a, b) = pl.segment(i);
        cv.line(a, b, color);
    }
    if cv.style.show_vertices {
        for &p in &pl.points {
            cv.dot(p, color);
        }
    }
}

/// Every intended folding of a fragment, left to right, in the palette
/// color of its kind.
pub fn render_fragment(frag: &GadgetFragment, style: &RenderStyle) -> Result<String, RenderError> {
    const GAP: i64 = 4;
    let color = style.kind_color(frag.kind).to_string();
    let mut placed = Vec::new();
    let mut x = 0;
    let mut bounds: Option<Box2> = None;
    for f in &frag.intended {
        let bb = f.path.bounding_box().ok_or(RenderError::Empty)?;
        let dx = x - bb.min.x;
        let pl = f.path.map(|p| Point::new(p.x + dx, p.y));
        let moved = Box2::new(Point::new(x, bb.min.y), Point::new(x + bb.width(), bb.max.y));
        bounds = Some(match bounds {
            None => moved,
            Some(b) => Box2::new(
                Point::new(b.min.x.min(moved.min.x), b.min.y.min(moved.min.y)),
                Point::new(b.max.x.max(moved.max.x), b.max.y.max(moved.max.y)),
            ),
        });
        x += bb.width() + GAP;
        placed.push((f.label.as_str(), moved, pl));
    }
    let mut cv = Canvas::new(style, bounds.ok_or(RenderError::Empty)?)?;
    for (label, bb, pl) in &placed {
        draw_polyline(&mut cv, pl, &color);
        if style.show_labels {
            cv.label(Point::new(bb.min.x, bb.max.y), label);
        }
    }
    Ok(cv.finish())
}
