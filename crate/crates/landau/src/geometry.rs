//! Kinetic scaling geometry: cylinders Q_R(z₀) = (t₀−R², t₀] × B(x₀; R³) ×
//! B(v₀; R), the Galilean group law, the homogeneous distance |||·|||, the
//! frame change around a moving center, and oscillation/Hölder diagnostics.

use crate::error::{Error, Result};
use crate::phase_space::{dot3, norm3, Field, PhaseGrid};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub t: f64,
    pub x: [f64; 3],
    pub v: [f64; 3],
}

impl Point {
    pub fn new(t: f64, x: [f64; 3], v: [f64; 3]) -> Self {
        Self { t, x, v }
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KineticCylinder {
    pub center: Point,
    pub r: f64,
    /// Spatial period; `None` measures x-distances in R³.
    pub period: Option<f64>,
}

impl KineticCylinder {
    pub fn new(center: Point, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("cylinder radius {r} must be positive")));
        }
        Ok(Self { center, r, period: None })
    }

    /// Cylinder on the periodic box [−π, π)³.
    pub fn on_torus(center: Point, r: f64) -> Result<Self> {
        Ok(Self { period: Some(2.0 * PI), ..Self::new(center, r)? })
    }
}

pub fn cylinder_contains(q: &KineticCylinder, z: &Point) -> bool {
    let c = &q.center;
    let r = q.r;
    if !(z.t > c.t - r * r && z.t <= c.t) {
        return false;
    }
    let mut dx = sub3(z.x, c.x);
    if let Some(p) = q.period {
        dx = dx.map(|d| wrap(d, p));
    }
    norm3(dx) < r * r * r && norm3(sub3(z.v, c.v)) < r
}

/// ζ⁻¹∘z = (t − τ, x − ξ + (t − τ)ν, v − ν) for ζ = (τ, ξ, ν).
pub fn group_inverse_compose(zeta: &Point, z: &Point) -> Point {
    let s = z.t - zeta.t;
    Point {
        t: s,
        x: std::array::from_fn(|i| z.x[i] - zeta.x[i] + s * zeta.v[i]),
        v: sub3(z.v, zeta.v),
    }
}

/// The ρ > 0 with t²/ρ⁴ + |x|²/ρ⁶ + |v|²/ρ² = 1 (bisection; 0 at the origin).
pub fn kinetic_distance(z: &Point) -> f64 {
    let (t2, x2, v2) = (z.t * z.t, dot3(z.x, z.x), dot3(z.v, z.v));
    let m = z.t.abs().sqrt().max(x2.sqrt().cbrt()).max(v2.sqrt());
    if m == 0.0 {
        return 0.0;
    }
    let lhs = |rho: f64| {
        let r2 = rho * rho;
        t2 / (r2 * r2) + x2 / (r2 * r2 * r2) + v2 / r2
    };
    // lhs(m) ≥ 1 ≥ lhs(√3 m)
    let (mut lo, mut hi) = (m, 3f64.sqrt() * m);
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if lhs(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// |t²/ρ⁴ + |x|²/ρ⁶ + |v|²/ρ² − 1| at ρ = |||z|||.
pub fn kinetic_distance_residual(z: &Point) -> f64 {
    let rho = kinetic_distance(z);
    if rho == 0.0 {
        return 0.0;
    }
    let r2 = rho * rho;
    (z.t * z.t / (r2 * r2) + dot3(z.x, z.x) / (r2 * r2 * r2) + dot3(z.v, z.v) / r2 - 1.0).abs()
}

/// Affine change of variables around z* = (t*, x*, v*):
/// X = D⁻¹Oᵀ(x − v*(t − t*)), V = D⁻¹Oᵀ(v − v*).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameChange {
    pub center: Point,
    /// Orthonormal, first column v*/|v*|.
    pub o: [[f64; 3]; 3],
    pub d: [f64; 3],
    pub m: f64,
}

impl FrameChange {
    pub fn new(center: Point, m: f64) -> Result<Self> {
        let s = norm3(center.v);
        if s < 0.5 {
            return Err(Error::InvalidParameter(format!("|v*| = {s} must be at least 1/2")));
        }
        let e1 = center.v.map(|c| c / s);
        // complete with the coordinate axis least aligned with e1
        let k = (0..3).min_by(|&a, &b| e1[a].abs().total_cmp(&e1[b].abs())).unwrap();
        let mut a = [0.0; 3];
        a[k] = 1.0;
        let p = dot3(a, e1);
        let e2 = {
            let w = [a[0] - p * e1[0], a[1] - p * e1[1], a[2] - p * e1[2]];
            let n = norm3(w);
            w.map(|c| c / n)
        };
        let e3 = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
        let o = std::array::from_fn(|i| [e1[i], e2[i], e3[i]]);
        let q = 1.0 + s;
        Ok(Self { center, o, d: [q.powf(-1.5), q.powf(-0.5), q.powf(-0.5)], m })
    }

    /// N = round(|v*|), so that N − 1/2 ≤ |v*| ≤ N + 1/2.
    pub fn n(&self) -> f64 {
        norm3(self.center.v).round()
    }

    pub fn r0(&self) -> f64 {
        (2.0 + self.n()).powf(-self.m)
    }

    pub fn r1(&self) -> f64 {
        (2.0 + self.n()).powf(-2.0 * self.m / 3.0 + 5.0 / 6.0)
    }

    pub fn r2(&self) -> f64 {
        (2.0 + self.n()).powf(-4.0 * self.m / 9.0 + 13.0 / 18.0)
    }

    /// ‖OᵀO − I‖_max.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| self.o[k][i] * self.o[k][j]).sum();
                e = e.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        e
    }

    fn to_frame(&self, y: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|k| self.o[k][i] * y[k]).sum::<f64>() / self.d[i])
    }

    fn from_frame(&self, y: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| (0..3).map(|i| self.o[k][i] * self.d[i] * y[i]).sum())
    }

    pub fn map(&self, z: &Point) -> Point {
        let c = &self.center;
        let s = z.t - c.t;
        Point {
            t: z.t,
            x: self.to_frame(std::array::from_fn(|i| z.x[i] - c.v[i] * s)),
            v: self.to_frame(sub3(z.v, c.v)),
        }
    }

    pub fn inverse(&self, z: &Point) -> Point {
        let c = &self.center;
        let s = z.t - c.t;
        let x = self.from_frame(z.x);
        let v = self.from_frame(z.v);
        Point { t: z.t, x: std::array::from_fn(|i| x[i] + c.v[i] * s), v: std::array::from_fn(|i| v[i] + c.v[i]) }
    }

    /// Image of the center: (t*, D⁻¹Oᵀx*, 0).
    pub fn center_image(&self) -> Point {
        Point { t: self.center.t, x: self.to_frame(self.center.x), v: [0.0; 3] }
    }
}

pub fn frame_map(fc: &FrameChange, z: &Point) -> Point {
    fc.map(z)
}

fn sample_ball(rng: &mut impl Rng, r: f64) -> [f64; 3] {
    loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = dot3(p, p);
        if n < 1.0 {
            return p.map(|c| c * r);
        }
    }
}

/// Uniform sample of Q (x-ball in R³).
pub fn sample_cylinder(rng: &mut impl Rng, q: &KineticCylinder) -> Point {
    let c = &q.center;
    let r = q.r;
    // (t₀ − R², t₀]
    let t = c.t - r * r * (1.0 - rng.gen::<f64>());
    let dx = sample_ball(rng, r * r * r);
    let dv = sample_ball(rng, r);
    Point { t, x: std::array::from_fn(|i| c.x[i] + dx[i]), v: std::array::from_fn(|i| c.v[i] + dv[i]) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub samples: usize,
    pub forward_violations: usize,
    pub backward_violations: usize,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Samples both containments of the frame change: Q_{r₀}(z*) into
/// Q_{r₁}(t*, X*, 0), and Q_{128r₁}(t*, X*, 0) back into Q_{128r₂}(z*).
pub fn check_containments(fc: &FrameChange, samples: usize, rng: &mut impl Rng) -> Result<ContainmentReport> {
    let (r0, r1, r2) = (fc.r0(), fc.r1(), fc.r2());
    let img = fc.center_image();
    let q0 = KineticCylinder::new(fc.center, r0)?;
    let q1 = KineticCylinder::new(img, r1)?;
    let q1b = KineticCylinder::new(img, 128.0 * r1)?;
    let q2 = KineticCylinder::new(fc.center, 128.0 * r2)?;
    let mut rep = ContainmentReport { samples, forward_violations: 0, backward_violations: 0, r0, r1, r2 };
    for _ in 0..samples {
        let z = sample_cylinder(rng, &q0);
        if !cylinder_contains(&q1, &fc.map(&z)) {
            rep.forward_violations += 1;
        }
        let w = sample_cylinder(rng, &q1b);
        if !cylinder_contains(&q2, &fc.inverse(&w)) {
            rep.backward_violations += 1;
        }
    }
    Ok(rep)
}

/// sup − inf over the sampled nodes inside Q. Snapshots with times in
/// (t₀ − R², t₀] are used; the x-distance is periodic when Q says so.
pub fn oscillation(samples: &[(f64, Field)], q: &KineticCylinder) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, f) in samples {
        let g: &PhaseGrid = &f.grid;
        let vs = g.velocities();
        for ix in 0..g.n_x() {
            let x = g.position(ix);
            for (iv, v) in vs.iter().enumerate() {
                if cylinder_contains(q, &Point::new(*t, x, *v)) {
                    let y = f.data[ix * g.n_v() + iv];
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
            }
        }
    }
    if lo > hi {
        return Err(Error::EmptyCylinder);
    }
    Ok(hi - lo)
}

/// |f(z₁) − f(z₂)| / |||z₂⁻¹∘z₁|||^α.
pub fn holder_quotient(f: impl Fn(&Point) -> f64, z1: &Point, z2: &Point, alpha: f64) -> Result<f64> {
    let d = kinetic_distance(&group_inverse_compose(z2, z1));
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((f(z1) - f(z2)).abs() / d.powf(alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    /// (decade exponent of the pair distance, max quotient) per populated decade.
    pub by_decade: Vec<(i32, f64)>,
    pub sup: f64,
}

/// Sampled Hölder seminorm of a trajectory: random node pairs (x-differences
/// wrapped to the torus), maxima stratified by kinetic-distance decade.
pub fn holder_seminorm(samples: &[(f64, Field)], alpha: f64, pairs: usize, rng: &mut impl Rng) -> Result<HolderEstimate> {
    let first = samples.first().ok_or(Error::EmptyCylinder)?;
    let g = first.1.grid;
    let (nx, nv3) = (g.n_x(), g.n_v());
    let mut best: std::collections::BTreeMap<i32, f64> = Default::default();
    let mut done = 0;
    let mut tries = 0;
    while done < pairs && tries < 20 * pairs {
        tries += 1;
        let (a, b) = (rng.gen_range(0..samples.len()), rng.gen_range(0..samples.len()));
        let (ia, ib) = (rng.gen_range(0..nx * nv3), rng.gen_range(0..nx * nv3));
        let (za, zb) = (point_of(&g, samples[a].0, ia), point_of(&g, samples[b].0, ib));
        let mut rel = group_inverse_compose(&zb, &za);
        rel.x = rel.x.map(|c| wrap(c, 2.0 * PI));
        let d = kinetic_distance(&rel);
        if d == 0.0 {
            continue;
        }
        let q = (samples[a].1.data[ia] - samples[b].1.data[ib]).abs() / d.powf(alpha);
        let e = best.entry(d.log10().floor() as i32).or_insert(0.0);
        *e = e.max(q);
        done += 1;
    }
    let by_decade: Vec<(i32, f64)> = best.into_iter().collect();
    let sup = by_decade.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(HolderEstimate { alpha, by_decade, sup })
}

fn point_of(g: &PhaseGrid, t: f64, flat: usize) -> Point {
    let nv3 = g.n_v();
    Point::new(t, g.position(flat / nv3), g.velocity(flat % nv3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use proptest::prelude::*;

    const Z0: Point = Point { t: 1.0, x: [0.2, -0.1, 0.3], v: [1.0, 0.5, -2.0] };

    #[test]
    fn cylinder_examples() {
        let q = KineticCylinder::new(Z0, 0.5).unwrap();
        assert!(cylinder_contains(&q, &Z0));
        assert!(!cylinder_contains(&q, &Point { t: Z0.t - 0.25, ..Z0 }));
        let z = Point { t: Z0.t, x: [0.2 + 0.0625, -0.1, 0.3], v: [1.25, 0.5, -2.0] };
        assert!(cylinder_contains(&q, &z));
        assert!(KineticCylinder::new(Z0, 0.0).is_err());
        let qt = KineticCylinder::on_torus(Point::new(0.0, [PI - 0.01, 0.0, 0.0], [0.0; 3]), 0.5).unwrap();
        assert!(cylinder_contains(&qt, &Point::new(0.0, [-PI + 0.01, 0.0, 0.0], [0.0; 3])));
    }

    #[test]
    fn group_law_examples() {
        let o = group_inverse_compose(&Z0, &Z0);
        assert_eq!(o, Point::new(0.0, [0.0; 3], [0.0; 3]));
        let zeta = Point { v: [0.0, 0.0, 1.0], ..Z0 };
        let r = group_inverse_compose(&zeta, &Z0);
        assert_eq!(r, Point::new(0.0, [0.0; 3], [1.0, 0.5, -3.0]));
        assert!((kinetic_distance(&r) - norm3(r.v)).abs() < 1e-14);
        assert_eq!(group_inverse_compose(&Point::new(0.0, [0.0; 3], [0.0; 3]), &Z0), Z0);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(kinetic_distance(&Point::new(0.0, [0.0; 3], [0.0; 3])), 0.0);
        let d = kinetic_distance(&Point::new(0.0, [0.0; 3], [3.0, 4.0, 0.0]));
        assert!((d - 5.0).abs() < 1e-14);
        assert!((kinetic_distance(&Point::new(-4.0, [0.0; 3], [0.0; 3])) - 2.0).abs() < 1e-14);
        assert!((kinetic_distance(&Point::new(0.0, [0.0, 8.0, 0.0], [0.0; 3])) - 2.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn distance_scaling_and_residual(t in -5.0..5.0f64, x in prop::array::uniform3(-5.0..5.0f64),
                                         v in prop::array::uniform3(-5.0..5.0f64), r in prop::sample::select(vec![0.5, 2.0, 10.0])) {
            let z = Point::new(t, x, v);
            prop_assume!(kinetic_distance(&z) > 1e-6);
            prop_assert!(kinetic_distance_residual(&z) <= 1e-12);
            let zr = Point::new(r * r * t, x.map(|c| r * r * r * c), v.map(|c| r * c));
            let (a, b) = (kinetic_distance(&zr), r * kinetic_distance(&z));
            prop_assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn frame_change_examples() {
        let fc = FrameChange::new(Z0, 10.0).unwrap();
        assert!(fc.orthonormality_defect() <= 1e-12);
        let e1 = Z0.v.map(|c| c / norm3(Z0.v));
        for i in 0..3 {
            assert!((fc.o[i][0] - e1[i]).abs() < 1e-15);
        }
        let c = fc.map(&Z0);
        assert_eq!(c.t, Z0.t);
        assert!(c.v.iter().all(|x| x.abs() < 1e-15));
        let img = fc.center_image();
        assert!(sub3(c.x, img.x).iter().all(|d| d.abs() < 1e-14));
        let z = Point::new(0.7, [1.0, 2.0, -0.5], [0.3, -1.0, 2.0]);
        let back = fc.inverse(&fc.map(&z));
        assert!((0..3).all(|i| (back.x[i] - z.x[i]).abs() < 1e-12 && (back.v[i] - z.v[i]).abs() < 1e-12));
        assert!(FrameChange::new(Point::new(0.0, [0.0; 3], [0.1, 0.0, 0.0]), 10.0).is_err());
    }

    #[test]
    fn containments_hold() {
        let center = Point::new(0.5, [0.3, -0.2, 0.1], [3.0, 0.4, -0.2]);
        let fc = FrameChange::new(center, 10.0).unwrap();
        assert_eq!(fc.n(), 3.0);
        let r = check_containments(&fc, 500, &mut rng(9)).unwrap();
        assert_eq!((r.forward_violations, r.backward_violations), (0, 0));
    }

    #[test]
    fn oscillation_examples() {
        let g = PhaseGrid::new(8, 6, 3.0, 1).unwrap();
        let c = crate::phase_space::lift(&g, |_, _| 2.0);
        let q = KineticCylinder::on_torus(Point::new(0.0, [0.0; 3], [0.0; 3]), 1.2).unwrap();
        assert_eq!(oscillation(&[(0.0, c)], &q).unwrap(), 0.0);
        let f = crate::phase_space::lift(&g, |x, v| x[0].sin() + v[1]);
        let s = [(0.0, f)];
        let small = KineticCylinder { r: 0.9, ..q };
        assert!(oscillation(&s, &small).unwrap() <= oscillation(&s, &q).unwrap());
        let far = KineticCylinder::new(Point::new(5.0, [0.0; 3], [0.0; 3]), 0.1).unwrap();
        assert!(matches!(oscillation(&s, &far), Err(Error::EmptyCylinder)));
    }

    #[test]
    fn holder_examples() {
        let z1 = Point::new(0.0, [0.1; 3], [0.5, 0.0, 0.0]);
        let h = 0.01;
        let z2 = Point { v: [0.5 + h, 0.0, 0.0], ..z1 };
        assert_eq!(holder_quotient(|_| 3.0, &z1, &z2, 1.0 / 3.0).unwrap(), 0.0);
        let q = holder_quotient(|z| z.v[0], &z1, &z2, 1.0 / 3.0).unwrap();
        assert!((q - h.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(matches!(holder_quotient(|z| z.v[0], &z1, &z1, 0.5), Err(Error::CoincidentPoints)));
    }
}
