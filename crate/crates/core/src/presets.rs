//! Canonical initial curves and exact solutions for the benchmark runs:
//! circles, equidistributed ellipses, the self-similarly shrinking ellipse
//! family in `R^3`, a trefoil knot, two interlocked rings, a closed helix,
//! and a closed double-spiral band.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::mesh::{NodalField, PeriodicGrid};

const TAU: f64 = 2.0 * core::f64::consts::PI;

#[derive(Clone, Debug)]
enum Kind {
    Circle {
        radius: f64,
    },
    /// Sampled equidistributed in arclength via a precomputed table.
    Ellipse2d {
        a: f64,
        b: f64,
        /// Cumulative chord length at `theta_k = 2 pi k / n`.
        table: Vec<f64>,
    },
    SelfSimilarEllipse3d {
        delta: f64,
    },
    Trefoil,
    InterlockedRings,
    ClosedHelix,
    /// Outbound Archimedean arm, return arm offset half a winding gap,
    /// radial caps at both ends; parameterized by arclength over a sampled
    /// polyline. The published experiment gives no formula for its spiral,
    /// so this is a stand-in of the same character.
    ArchimedeanSpiral {
        points: Vec<[f64; 2]>,
        cumlen: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct CurvePreset {
    kind: Kind,
}

impl CurvePreset {
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(String::from("circle radius must be positive")));
        }
        Ok(CurvePreset { kind: Kind::Circle { radius } })
    }

    pub fn ellipse_2d(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidInput(String::from("ellipse semi-axes must be positive")));
        }
        let n = 10_000usize;
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        let (mut px, mut py) = (a, 0.0);
        for k in 1..=n {
            let th = TAU * k as f64 / n as f64;
            let (x, y) = (a * math::cos(th), b * math::sin(th));
            acc += math::hypot(x - px, y - py);
            table.push(acc);
            px = x;
            py = y;
        }
        Ok(CurvePreset { kind: Kind::Ellipse2d { a, b, table } })
    }

    pub fn self_similar_ellipse_3d(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(String::from("ellipse delta must be positive")));
        }
        Ok(CurvePreset { kind: Kind::SelfSimilarEllipse3d { delta } })
    }

    pub fn trefoil() -> Self {
        CurvePreset { kind: Kind::Trefoil }
    }

    pub fn interlocked_rings() -> Self {
        CurvePreset { kind: Kind::InterlockedRings }
    }

    pub fn closed_helix() -> Self {
        CurvePreset { kind: Kind::ClosedHelix }
    }

    pub fn archimedean_spiral(r_inner: f64, r_outer: f64, windings: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_outer > r_inner && windings >= 1.0) {
            return Err(Error::InvalidInput(String::from(
                "spiral needs 0 < r_inner < r_outer and windings >= 1",
            )));
        }
        let gap = (r_outer - r_inner) / windings;
        let theta_end = TAU * windings;
        let samples = 20_000usize;
        let mut points: Vec<[f64; 2]> = Vec::new();
        // outbound arm
        for k in 0..=samples {
            let th = theta_end * k as f64 / samples as f64;
            let r = r_inner + gap * th / TAU;
            points.push([r * math::cos(th), r * math::sin(th)]);
        }
        // outer radial cap to the return arm
        let cap_steps = 64usize;
        let (ce, se) = (math::cos(theta_end), math::sin(theta_end));
        for k in 1..=cap_steps {
            let r = r_outer + 0.5 * gap * k as f64 / cap_steps as f64;
            points.push([r * ce, r * se]);
        }
        // return arm, offset half a gap, traversed backwards
        for k in 1..=samples {
            let th = theta_end * (samples - k) as f64 / samples as f64;
            let r = r_inner + gap * th / TAU + 0.5 * gap;
            points.push([r * math::cos(th), r * math::sin(th)]);
        }
        // inner radial cap back to the start
        for k in 1..cap_steps {
            let r = r_inner + 0.5 * gap * (cap_steps - k) as f64 / cap_steps as f64;
            points.push([r, 0.0]);
        }
        let mut cumlen = Vec::with_capacity(points.len() + 1);
        cumlen.push(0.0);
        let mut acc = 0.0;
        for k in 0..points.len() {
            let nxt = points[(k + 1) % points.len()];
            acc += math::hypot(nxt[0] - points[k][0], nxt[1] - points[k][1]);
            cumlen.push(acc);
        }
        Ok(CurvePreset { kind: Kind::ArchimedeanSpiral { points, cumlen } })
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::Circle { .. } | Kind::Ellipse2d { .. } | Kind::ArchimedeanSpiral { .. } => 2,
            _ => 3,
        }
    }

    /// Presets with a usable closed-form (or table) derivative; the helix and
    /// spiral have corners, so runs on them initialize by nodal interpolation
    /// instead of the Ritz projection.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, Kind::ClosedHelix | Kind::ArchimedeanSpiral { .. })
    }

    /// Evaluate the curve at parameter `rho`; `t` is meaningful only for the
    /// self-similar ellipse (defined for `t < 1/2`, default 0).
    pub fn evaluate(&self, rho: f64, t: Option<f64>) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(rho, t, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, rho: f64, t: Option<f64>, out: &mut [f64]) -> Result<()> {
        match &self.kind {
            Kind::Circle { radius } => {
                out[0] = radius * math::cos(TAU * rho);
                out[1] = radius * math::sin(TAU * rho);
            }
            Kind::Ellipse2d { a, b, table } => {
                let th = ellipse_theta(table, rho);
                out[0] = a * math::cos(th);
                out[1] = b * math::sin(th);
            }
            Kind::SelfSimilarEllipse3d { delta } => {
                let t = t.unwrap_or(0.0);
                if t >= 0.5 {
                    return Err(Error::InvalidTime { t });
                }
                let s = math::sqrt(1.0 - 2.0 * t);
                let inv_sqrt2 = 1.0 / math::sqrt(2.0);
                out[0] = s * inv_sqrt2 * math::cos(TAU * rho);
                out[1] = s * delta * math::sin(TAU * rho);
                out[2] = s * delta * inv_sqrt2 * math::cos(TAU * rho);
            }
            Kind::Trefoil => {
                let bulge = 2.0 + math::cos(3.0 * TAU * rho);
                out[0] = bulge * math::cos(2.0 * TAU * rho);
                out[1] = bulge * math::sin(2.0 * TAU * rho);
                out[2] = math::sin(3.0 * TAU * rho);
            }
            Kind::InterlockedRings => {
                let (c1, c2, c3, c4) = (
                    math::cos(TAU * rho),
                    math::cos(2.0 * TAU * rho),
                    math::cos(3.0 * TAU * rho),
                    math::cos(4.0 * TAU * rho),
                );
                let (s1, s3, s4, s6) = (
                    math::sin(TAU * rho),
                    math::sin(3.0 * TAU * rho),
                    math::sin(4.0 * TAU * rho),
                    math::sin(6.0 * TAU * rho),
                );
                let s5h = math::sin(2.5 * TAU * rho);
                out[0] = 0.125 * (10.0 * (c1 + c3) + c2 + c4);
                out[1] = 0.125 * (6.0 * s1 + 10.0 * s3);
                out[2] = 0.125 * (4.0 * s3 * s5h + 4.0 * s4 - 2.0 * s6);
            }
            Kind::ClosedHelix => {
                helix_path(rho, out);
            }
            Kind::ArchimedeanSpiral { points, cumlen } => {
                let total = *cumlen.last().unwrap();
                let target = (rho - libm_floor(rho)) * total;
                let mut lo = 0usize;
                let mut hi = points.len();
                while lo + 1 < hi {
                    let mid = (lo + hi) / 2;
                    if cumlen[mid] <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let seg = cumlen[lo + 1] - cumlen[lo];
                let xi = if seg > 0.0 { (target - cumlen[lo]) / seg } else { 0.0 };
                let a = points[lo];
                let b = points[(lo + 1) % points.len()];
                out[0] = (1.0 - xi) * a[0] + xi * b[0];
                out[1] = (1.0 - xi) * a[1] + xi * b[1];
            }
        }
        Ok(())
    }

    /// Parameter derivative where the preset is smooth; `None` for the
    /// piecewise-linear constructions (helix, spiral).
    pub fn derivative(&self, rho: f64, t: Option<f64>) -> Result<Option<Vec<f64>>> {
        let mut out = vec![0.0; self.dim()];
        match &self.kind {
            Kind::Circle { radius } => {
                out[0] = -TAU * radius * math::sin(TAU * rho);
                out[1] = TAU * radius * math::cos(TAU * rho);
            }
            Kind::Ellipse2d { a, b, table } => {
                let th = ellipse_theta(table, rho);
                let dth = ellipse_dtheta(table, rho);
                out[0] = -a * math::sin(th) * dth;
                out[1] = b * math::cos(th) * dth;
            }
            Kind::SelfSimilarEllipse3d { delta } => {
                let t = t.unwrap_or(0.0);
                if t >= 0.5 {
                    return Err(Error::InvalidTime { t });
                }
                let s = math::sqrt(1.0 - 2.0 * t);
                let inv_sqrt2 = 1.0 / math::sqrt(2.0);
                out[0] = -s * TAU * inv_sqrt2 * math::sin(TAU * rho);
                out[1] = s * TAU * delta * math::cos(TAU * rho);
                out[2] = -s * TAU * delta * inv_sqrt2 * math::sin(TAU * rho);
            }
            Kind::Trefoil => {
                let bulge = 2.0 + math::cos(3.0 * TAU * rho);
                let dbulge = -3.0 * TAU * math::sin(3.0 * TAU * rho);
                let (c, s) = (math::cos(2.0 * TAU * rho), math::sin(2.0 * TAU * rho));
                out[0] = dbulge * c - bulge * 2.0 * TAU * s;
                out[1] = dbulge * s + bulge * 2.0 * TAU * c;
                out[2] = 3.0 * TAU * math::cos(3.0 * TAU * rho);
            }
            Kind::InterlockedRings => {
                let d = TAU;
                out[0] = 0.125
                    * (-10.0 * (d * math::sin(TAU * rho) + 3.0 * d * math::sin(3.0 * TAU * rho))
                        - 2.0 * d * math::sin(2.0 * TAU * rho)
                        - 4.0 * d * math::sin(4.0 * TAU * rho));
                out[1] = 0.125
                    * (6.0 * d * math::cos(TAU * rho) + 30.0 * d * math::cos(3.0 * TAU * rho));
                out[2] = 0.125
                    * (4.0
                        * (3.0 * d * math::cos(3.0 * TAU * rho) * math::sin(2.5 * TAU * rho)
                            + 2.5 * d * math::sin(3.0 * TAU * rho) * math::cos(2.5 * TAU * rho))
                        + 16.0 * d * math::cos(4.0 * TAU * rho)
                        - 12.0 * d * math::cos(6.0 * TAU * rho));
            }
            Kind::ClosedHelix | Kind::ArchimedeanSpiral { .. } => return Ok(None),
        }
        Ok(Some(out))
    }

    /// Nodal curve on `grid` at `t = 0`: interpolation for every preset
    /// except the closed helix, which uses the arclength-allotted polygon.
    pub fn initial_field(&self, grid: PeriodicGrid) -> Result<NodalField> {
        match &self.kind {
            Kind::ClosedHelix => closed_helix_nodes(grid),
            _ => {
                let d = self.dim();
                let mut field = NodalField::zeros(grid, d);
                for j in 0..grid.node_count() {
                    let rho = grid.node(j);
                    self.eval_into(rho, Some(0.0), field.node_mut(j))?;
                }
                Ok(field)
            }
        }
    }
}

#[inline]
fn libm_floor(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.floor()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::floor(x)
    }
}

fn ellipse_theta(table: &[f64], rho: f64) -> f64 {
    let n = table.len() - 1;
    let total = table[n];
    let target = (rho - libm_floor(rho)) * total;
    let mut lo = 0usize;
    let mut hi = n;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if table[mid] <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let seg = table[lo + 1] - table[lo];
    let xi = if seg > 0.0 { (target - table[lo]) / seg } else { 0.0 };
    TAU * (lo as f64 + xi) / n as f64
}

fn ellipse_dtheta(table: &[f64], rho: f64) -> f64 {
    let n = table.len() - 1;
    let total = table[n];
    let target = (rho - libm_floor(rho)) * total;
    let mut lo = 0usize;
    let mut hi = n;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if table[mid] <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let seg = table[lo + 1] - table[lo];
    total * (TAU / n as f64) / seg
}

/// Arclength of the open helix `(sin(16 pi u), cos(16 pi u), u)`, `u in
/// [0,1]`; its speed is constant.
pub fn helix_arclength() -> f64 {
    math::sqrt(1.0 + 256.0 * core::f64::consts::PI * core::f64::consts::PI)
}

/// The closed helix path by arclength fraction: helix, then three unit
/// segments visiting `(0,0,1)` and the origin before returning to the start.
fn helix_path(rho: f64, out: &mut [f64]) {
    let lh = helix_arclength();
    let total = lh + 3.0;
    let s = (rho - libm_floor(rho)) * total;
    let helix_point = |u: f64, out: &mut [f64]| {
        out[0] = math::sin(8.0 * TAU * u);
        out[1] = math::cos(8.0 * TAU * u);
        out[2] = u;
    };
    if s <= lh {
        helix_point(s / lh, out);
    } else if s <= lh + 1.0 {
        let xi = s - lh;
        // (0,1,1) -> (0,0,1)
        out[0] = 0.0;
        out[1] = 1.0 - xi;
        out[2] = 1.0;
    } else if s <= lh + 2.0 {
        let xi = s - lh - 1.0;
        // (0,0,1) -> (0,0,0)
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = 1.0 - xi;
    } else {
        let xi = s - lh - 2.0;
        // (0,0,0) -> (0,1,0)
        out[0] = 0.0;
        out[1] = xi;
        out[2] = 0.0;
    }
}

/// Closed-helix initial polygon: node counts are allotted to the four path
/// pieces proportionally to arclength (at least one node each), and nodes
/// are spread uniformly within each piece. Needs `J >= 32` so the unit
/// closing segments are resolved.
pub fn closed_helix_nodes(grid: PeriodicGrid) -> Result<NodalField> {
    let jn = grid.node_count();
    if jn < 32 {
        return Err(Error::InvalidInput(String::from(
            "the closed helix polygon needs J >= 32",
        )));
    }
    let lh = helix_arclength();
    let lengths = [lh, 1.0, 1.0, 1.0];
    let total: f64 = lh + 3.0;
    let mut counts = [0usize; 4];
    for i in 1..4 {
        counts[i] = ((jn as f64 * lengths[i] / total) + 0.5).max(1.0) as usize;
    }
    counts[0] = jn - counts[1] - counts[2] - counts[3];

    let mut field = NodalField::zeros(grid, 3);
    let mut j = 0usize;
    // piece 0: the helix, by its own (constant-speed) parameter
    for k in 0..counts[0] {
        let u = k as f64 / counts[0] as f64;
        let node = field.node_mut(j);
        node[0] = math::sin(8.0 * TAU * u);
        node[1] = math::cos(8.0 * TAU * u);
        node[2] = u;
        j += 1;
    }
    let segments = [
        ([0.0, 1.0, 1.0], [0.0, 0.0, 1.0]),
        ([0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
        ([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
    ];
    for (i, (a, b)) in segments.iter().enumerate() {
        for k in 0..counts[i + 1] {
            let xi = k as f64 / counts[i + 1] as f64;
            let node = field.node_mut(j);
            for c in 0..3 {
                node[c] = (1.0 - xi) * a[c] + xi * b[c];
            }
            j += 1;
        }
    }
    debug_assert_eq!(j, jn);
    Ok(field)
}
