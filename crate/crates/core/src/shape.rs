//! Initial interface shapes on the unit torus.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed curve enclosing the `u < alpha` region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64, angle: f64 },
    RoundedSquare { center: [f64; 2], half: f64, corner: f64 },
}

/// `{kind, params}` as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ShapeConfig {
    pub fn build(&self) -> Result<Shape> {
        Shape::from_params(&self.kind, &self.params)
    }
}

impl Shape {
    pub fn circle(radius: f64) -> Self {
        Shape::Circle {
            center: [0.5, 0.5],
            radius,
        }
    }

    /// Recognised keys: `cx`, `cy` for every kind; `R` (circle); `a`, `b`,
    /// `angle` (ellipse); `L` half side and `r` corner radius (rounded-square).
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match kind {
            "circle" => &["cx", "cy", "R"],
            "ellipse" => &["cx", "cy", "a", "b", "angle"],
            "rounded-square" => &["cx", "cy", "L", "r"],
            _ => return Err(Error::Config(format!("unknown shape kind '{kind}'"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown parameter '{k}' for shape '{kind}'")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let center = [get("cx", 0.5), get("cy", 0.5)];
        let shape = match kind {
            "circle" => Shape::Circle {
                center,
                radius: get("R", 0.25),
            },
            "ellipse" => Shape::Ellipse {
                center,
                a: get("a", 0.3),
                b: get("b", 0.2),
                angle: get("angle", 0.0),
            },
            _ => Shape::RoundedSquare {
                center,
                half: get("L", 0.2),
                corner: get("r", 0.05),
            },
        };
        shape.check()?;
        Ok(shape)
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            Shape::Circle { radius, .. } => radius > 0.0 && radius < 0.5,
            Shape::Ellipse { a, b, .. } => a > 0.0 && b > 0.0 && a < 0.5 && b < 0.5,
            Shape::RoundedSquare { half, corner, .. } => corner > 0.0 && corner <= half && half < 0.5,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("shape does not fit in the unit torus: {self:?}")))
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match *self {
            Shape::Circle { center, .. } | Shape::Ellipse { center, .. } | Shape::RoundedSquare { center, .. } => center,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Circle { radius, .. } => PI * radius * radius,
            Shape::Ellipse { a, b, .. } => PI * a * b,
            Shape::RoundedSquare { half, corner, .. } => 4.0 * half * half - (4.0 - PI) * corner * corner,
        }
    }

    fn param_point(&self, t: f64) -> [f64; 2] {
        let [cx, cy] = self.center();
        match *self {
            Shape::Circle { radius, .. } => [cx + radius * t.cos(), cy + radius * t.sin()],
            Shape::Ellipse { a, b, angle, .. } => {
                let (x, y) = (a * t.cos(), b * t.sin());
                let (s, c) = angle.sin_cos();
                [cx + c * x - s * y, cy + s * x + c * y]
            }
            Shape::RoundedSquare { half, corner, .. } => {
                // walk the boundary by arclength, one quarter per side
                let flat = 2.0 * (half - corner);
                let arc = 0.5 * PI * corner;
                let side = flat + arc;
                let s = t / (2.0 * PI) * 4.0 * side;
                let q = (s / side).floor();
                let k = (q as i64).rem_euclid(4) as usize;
                let r = s - q * side;
                let inner = half - corner;
                // local frame: side k starts at the middle-right of edge k
                let (px, py) = if r < 0.5 * flat {
                    (half, r)
                } else if r < 0.5 * flat + arc {
                    let phi = (r - 0.5 * flat) / corner;
                    (inner + corner * phi.cos(), inner + corner * phi.sin())
                } else {
                    (inner - (r - 0.5 * flat - arc), half)
                };
                let (x, y) = match k {
                    0 => (px, py),
                    1 => (-py, px),
                    2 => (-px, -py),
                    _ => (py, -px),
                };
                [cx + x, cy + y]
            }
        }
    }

    /// `m` counter-clockwise vertices at near-uniform arclength.
    pub fn boundary(&self, m: usize) -> Vec<[f64; 2]> {
        if let Shape::Circle { .. } = self {
            return (0..m).map(|k| self.param_point(2.0 * PI * k as f64 / m as f64)).collect();
        }
        let fine = 64 * m;
        let pts: Vec<[f64; 2]> = (0..=fine)
            .map(|k| self.param_point(2.0 * PI * k as f64 / fine as f64))
            .collect();
        let mut cum = vec![0.0; fine + 1];
        for k in 1..=fine {
            cum[k] = cum[k - 1] + (pts[k][0] - pts[k - 1][0]).hypot(pts[k][1] - pts[k - 1][1]);
        }
        let total = cum[fine];
        let mut out = Vec::with_capacity(m);
        let mut seg = 0;
        for k in 0..m {
            let s = total * k as f64 / m as f64;
            while cum[seg + 1] < s {
                seg += 1;
            }
            let w = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
            out.push([
                pts[seg][0] + w * (pts[seg + 1][0] - pts[seg][0]),
                pts[seg][1] + w * (pts[seg + 1][1] - pts[seg][1]),
            ]);
        }
        out
    }

    /// Analytic signed distance (negative inside), torus minimal image.
    /// `None` for the ellipse, which has no closed form.
    pub fn signed_distance(&self, p: [f64; 2]) -> Option<f64> {
        let c = self.center();
        let dx = (p[0] - c[0]) - (p[0] - c[0]).round();
        let dy = (p[1] - c[1]) - (p[1] - c[1]).round();
        match *self {
            Shape::Circle { radius, .. } => Some(dx.hypot(dy) - radius),
            Shape::RoundedSquare { half, corner, .. } => {
                let qx = dx.abs() - (half - corner);
                let qy = dy.abs() - (half - corner);
                let outside = qx.max(0.0).hypot(qy.max(0.0));
                Some(outside + qx.max(qy).min(0.0) - corner)
            }
            Shape::Ellipse { .. } => None,
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// `kind:key=value,key=value`, e.g. `circle:R=0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for item in rest.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad shape parameter '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number in shape parameter '{item}'")))?;
            params.insert(k.trim().to_string(), v);
        }
        Shape::from_params(kind.trim(), &params)
    }
}
