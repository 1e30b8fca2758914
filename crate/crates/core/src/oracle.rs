//! Sampling oracle for auditing images and preimages.
//!
//! Feasibility of `A ∩ {Tx = y}` is decided by `is_empty` on the original
//! system with `Tx = y` written as inequality pairs. That path never touches
//! the kernel basis of `T`, so it checks the image pipeline independently.
//!
//! # Sample stream
//!
//! Points come from SplitMix64 seeded with `seed`:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! (all arithmetic wrapping mod 2^64). Each coordinate consumes one output
//! `z` and equals `(z mod (2RD + 1) - RD) / D` with `R = box_radius` and
//! `D = SAMPLE_DENOMINATOR`; coordinates are drawn point by point, in order.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{int, ratio, QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::polyhedron::{HPolyhedron, IneqRow};
use crate::projection::{check_certificate, Certificate, LinMap};

pub const SAMPLE_DENOMINATOR: i64 = 4;

/// SplitMix64, the fixed generator behind every sample stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `lo..=hi` by reduction modulo the width.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let width = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % width) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub box_radius: u64,
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize, box_radius: u64) -> Result<Self> {
        if count == 0 || box_radius == 0 {
            return Err(Error::PreconditionViolated(
                "sample count and box radius must be at least 1".into(),
            ));
        }
        Ok(SampleSpec {
            seed,
            count,
            box_radius,
        })
    }

    fn reseeded(&self, salt: u64) -> SampleSpec {
        SampleSpec {
            seed: self.seed ^ salt,
            ..*self
        }
    }
}

/// `count` points of the box `[-R, R]^dim` on the grid of step `1/D`.
pub fn sample_points(spec: &SampleSpec, dim: usize) -> Vec<QVector> {
    let mut rng = SplitMix64::new(spec.seed);
    let half = spec.box_radius as i64 * SAMPLE_DENOMINATOR;
    (0..spec.count)
        .map(|_| {
            QVector::new(
                (0..dim)
                    .map(|_| ratio(rng.range(-half, half), SAMPLE_DENOMINATOR))
                    .collect(),
            )
        })
        .collect()
}

/// The rational of smallest denominator in `[lo, hi]`, by continued fractions.
fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo <= hi);
    let c = lo.ceil();
    if &c <= hi {
        // the integer of least magnitude inside the interval
        return if c.is_positive() {
            c
        } else if hi.is_negative() {
            hi.floor()
        } else {
            Rational::zero()
        };
    }
    let n = lo.floor();
    // lo and hi share the integer part n and neither is an integer
    let inner = simplest_between(&(hi - &n).recip(), &(lo - &n).recip());
    n + inner.recip()
}

/// Steps of the walk in [`points_in`] between restarts from the anchor.
const WALK_RESTART: usize = 8;

/// `count` points of `p` (empty if `p` is), from an exact hit-and-run walk.
///
/// The walk starts at the elimination witness of `p`. Box sample `s` in
/// turn gives the line through the current point `c` along `s - c`. That
/// line meets `p` in an interval of steps `[lo, hi]`, clamped to `[-1, 1]`.
/// The next point is `c + t (s - c)`, where `t` is the rational of smallest
/// denominator (the integer of least magnitude, if any) in the `k`-th eighth
/// `[lo + (k / 8) (hi - lo), lo + ((k + 1) / 8) (hi - lo)]`,
/// `k = z mod 8` and `z` is a draw from a second SplitMix64 stream seeded
/// with `seed ^ 0x9A1C`. Taking the simplest step and returning to the
/// anchor every eight steps keeps denominators small.
pub fn points_in(p: &HPolyhedron, spec: &SampleSpec) -> Vec<QVector> {
    let Some(anchor) = p.feasible_point() else {
        return Vec::new();
    };
    let mut rng = SplitMix64::new(spec.seed ^ 0x9A1C);
    let mut out = vec![anchor.clone()];
    let mut cur = anchor.clone();
    for (step, s) in sample_points(spec, p.dim()).into_iter().skip(1).enumerate() {
        if step % WALK_RESTART == 0 {
            cur = anchor.clone();
        }
        let d = s.sub(&cur);
        let (mut lo, mut hi) = (-Rational::one(), Rational::one());
        for r in p.rows() {
            let rate = r.value(&d);
            if rate.is_zero() {
                continue;
            }
            let limit = (&r.b - r.value(&cur)) / &rate;
            if rate > Rational::zero() {
                hi = hi.min(limit);
            } else {
                lo = lo.max(limit);
            }
        }
        let k = rng.range(0, 7);
        let width = &hi - &lo;
        let t = simplest_between(&(&lo + ratio(k, 8) * &width), &(&lo + ratio(k + 1, 8) * &width));
        cur = cur.add_scaled(&t, &d);
        debug_assert!(p.rows().iter().all(|r| r.satisfied_by(&cur)));
        out.push(cur.clone());
    }
    out
}

/// Whether some `x` in `a` has `t x = y`.
pub fn feasible_with_equalities(a: &HPolyhedron, t: &LinMap, y: &QVector) -> Result<bool> {
    crate::error::check_dim(t.domain_dim(), a.dim())?;
    crate::error::check_dim(t.codomain_dim(), y.dim())?;
    let mut rows = a.rows().to_vec();
    for r in 0..t.codomain_dim() {
        let tr = t.matrix.row(r);
        rows.push(IneqRow::new(tr.scaled(&-Rational::one()), -y[r].clone()));
        rows.push(IneqRow::new(tr, y[r].clone()));
    }
    Ok(!HPolyhedron::new(a.dim(), rows)?.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub property: String,
    pub witness: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks_run: BTreeMap<String, usize>,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, property: &str, ok: bool, witness: impl FnOnce() -> String, expected: &str, actual: &str) {
        *self.checks_run.entry(property.to_string()).or_default() += 1;
        if !ok {
            self.failures.push(Failure {
                property: property.to_string(),
                witness: witness(),
                expected: expected.to_string(),
                actual: actual.to_string(),
            });
        }
    }

    fn finish(mut self) -> Self {
        self.failures.sort();
        self
    }

    pub fn failures_for(&self, property: &str) -> impl Iterator<Item = &Failure> {
        let property = property.to_string();
        self.failures.iter().filter(move |f| f.property == property)
    }

    /// One `PASS`/`FAIL` line per property, sorted by property name.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, runs) in &self.checks_run {
            let failed: Vec<&Failure> = self.failures_for(name).collect();
            match failed.first() {
                None => out.push_str(&format!("PASS {name} {runs} checks\n")),
                Some(f) => out.push_str(&format!(
                    "FAIL {name} {}/{runs} failed; witness {} expected {} actual {}\n",
                    failed.len(),
                    f.witness,
                    f.expected,
                    f.actual
                )),
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "verdict": if self.passed() { "pass" } else { "fail" },
            "checks_run": self.checks_run,
            "failures": self.failures,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

fn consistent_dims(report: &mut VerificationReport, ok: bool, what: &str) -> bool {
    report.record("dimensions", ok, || what.to_string(), "consistent", "mismatch");
    ok
}

/// Points on and just either side of each row's boundary hyperplane, placed
/// through the orthogonal projection of `base` onto it.
fn boundary_probes(rows: &[IneqRow], base: &QVector) -> Vec<QVector> {
    let mut probes = Vec::new();
    for r in rows {
        let norm = r.a.dot(&r.a);
        if norm.is_zero() {
            continue;
        }
        let on = base.add_scaled(&((&r.b - r.value(base)) / &norm), &r.a);
        let nudge = Rational::one() / (int(SAMPLE_DENOMINATOR) * &norm);
        probes.push(on.add_scaled(&nudge, &r.a));
        probes.push(on.add_scaled(&-&nudge, &r.a));
        probes.push(on);
    }
    probes
}

/// Audits `result` as the image of `a` under `t`:
///
/// - `soundness`: `T x` lies in `result` for sampled `x` in `a`;
/// - `completeness`: every sampled `y` in `result` is `T x` for some `x` in `a`;
/// - `exclusion`: sampled `y` outside `result` are not attained;
/// - `certificates`: every supplied certificate checks exactly;
/// - `cone`: a cone input has a cone image.
///
/// Candidate `y` come from points of `result`, images of the soundness
/// samples, the raw box, and probes straddling each bound of `result`.
pub fn verify_image(
    t: &LinMap,
    a: &HPolyhedron,
    result: &HPolyhedron,
    certs: Option<&[Certificate]>,
    spec: &SampleSpec,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let dims_ok = t.domain_dim() == a.dim() && t.codomain_dim() == result.dim();
    if !consistent_dims(&mut report, dims_ok, "map, input and result dimensions") {
        return report.finish();
    }

    let xs = points_in(a, spec);
    let mut ys = Vec::new();
    for x in &xs {
        let y = t.apply(x).expect("dims checked");
        let inside = result.contains(&y).expect("dims checked");
        report.record("soundness", inside, || format!("x={x} Tx={y}"), "true", "false");
        ys.push(y);
    }

    let in_result = points_in(result, &spec.reseeded(0x5EED_0001));
    let anchor = in_result.first().cloned().or_else(|| ys.first().cloned());
    ys.extend(in_result);
    ys.extend(sample_points(&spec.reseeded(0x5EED_0002), result.dim()));
    if let Some(base) = anchor {
        ys.extend(boundary_probes(result.rows(), &base));
    }
    ys.sort();
    ys.dedup();
    for y in &ys {
        let inside = result.contains(y).expect("dims checked");
        let attained = feasible_with_equalities(a, t, y).expect("dims checked");
        if inside {
            report.record("completeness", attained, || format!("y={y}"), "attained", "not attained");
        } else {
            report.record("exclusion", !attained, || format!("y={y}"), "not attained", "attained");
        }
    }

    if let Some(certs) = certs {
        if certs.len() != result.len() {
            report.record(
                "certificates",
                false,
                || format!("{} certificates for {} rows", certs.len(), result.len()),
                "one per row",
                "count mismatch",
            );
        } else {
            for (k, (row, cert)) in result.rows().iter().zip(certs).enumerate() {
                let ok = check_certificate(a, t, row, cert).unwrap_or(false);
                report.record("certificates", ok, || format!("row {k}"), "valid", "invalid");
            }
        }
    }

    if a.is_cone() {
        report.record("cone", result.is_cone(), || "nonzero bound".into(), "cone", "not a cone");
    }
    report.finish()
}

/// Audits `result` as `T^{-1}(b)` by the pointwise law
/// `x in result <=> T x in b` on box samples, points of `result` and
/// probes around its bounds.
pub fn verify_preimage(
    t: &LinMap,
    b: &HPolyhedron,
    result: &HPolyhedron,
    spec: &SampleSpec,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let dims_ok = t.codomain_dim() == b.dim() && t.domain_dim() == result.dim();
    if !consistent_dims(&mut report, dims_ok, "map, input and result dimensions") {
        return report.finish();
    }
    let mut xs = sample_points(spec, result.dim());
    let inside = points_in(result, &spec.reseeded(0x5EED_0003));
    if let Some(base) = inside.first().cloned() {
        xs.extend(boundary_probes(result.rows(), &base));
    }
    xs.extend(inside);
    for x in &xs {
        let lhs = result.contains(x).expect("dims checked");
        let rhs = b.contains(&t.apply(x).expect("dims checked")).expect("dims checked");
        report.record(
            "pointwise",
            lhs == rhs,
            || format!("x={x}"),
            &rhs.to_string(),
            &lhs.to_string(),
        );
    }
    report.finish()
}

/// A random `rows x cols` integer matrix with entries in `[-bound, bound]`.
pub fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize, bound: i64) -> QMatrix {
    let data = (0..rows * cols).map(|_| int(rng.range(-bound, bound))).collect();
    QMatrix::new(rows, cols, data).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{image, preimage, ImageOptions};

    fn square() -> HPolyhedron {
        HPolyhedron::from_i64(
            2,
            &[(&[1, 0], 1), (&[-1, 0], 0), (&[0, 1], 1), (&[0, -1], 0)],
        )
    }

    #[test]
    fn simplest_rational_in_interval() {
        assert_eq!(simplest_between(&ratio(1, 3), &ratio(1, 2)), ratio(1, 2));
        assert_eq!(simplest_between(&ratio(3, 10), &ratio(2, 5)), ratio(1, 3));
        assert_eq!(simplest_between(&ratio(-7, 4), &ratio(-13, 8)), ratio(-5, 3));
        assert_eq!(simplest_between(&ratio(-1, 2), &ratio(3, 1)), ratio(0, 1));
        assert_eq!(simplest_between(&ratio(-9, 2), &ratio(-3, 1)), ratio(-3, 1));
        assert_eq!(simplest_between(&ratio(5, 7), &ratio(5, 7)), ratio(5, 7));
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 1234567, as published with the algorithm
        let mut rng = SplitMix64::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
        assert_eq!(rng.next_u64(), 9817491932198370423);
    }

    #[test]
    fn sample_examples() {
        let spec = SampleSpec::new(1, 3, 2).unwrap();
        assert_eq!(sample_points(&spec, 0), vec![QVector::zeros(0); 3]);
        assert_eq!(sample_points(&spec, 2), sample_points(&spec, 2));
        let spec = SampleSpec::new(7, 100, 3).unwrap();
        let pts = sample_points(&spec, 2);
        assert_eq!(pts.len(), 100);
        assert!(pts
            .iter()
            .flat_map(|p| p.entries().to_vec())
            .all(|q| q >= int(-3) && q <= int(3)));
        assert!(SampleSpec::new(1, 0, 1).is_err());
        assert!(SampleSpec::new(1, 1, 0).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let id = LinMap::identity(1);
        assert!(feasible_with_equalities(&HPolyhedron::whole_space(1), &id, &QVector::from_i64(&[9])).unwrap());
        let ray = HPolyhedron::from_i64(1, &[(&[-1], 0)]);
        assert!(!feasible_with_equalities(&ray, &id, &QVector::from_i64(&[-1])).unwrap());
        let t = LinMap::new(QMatrix::from_i64(&[&[1, 0]]));
        assert!(feasible_with_equalities(&square(), &t, &QVector::new(vec![ratio(1, 2)])).unwrap());
    }

    #[test]
    fn verify_identity_and_projection() {
        let spec = SampleSpec::new(3, 40, 2).unwrap();
        let a = square();
        let r = verify_image(&LinMap::identity(2), &a, &a, None, &spec);
        assert!(r.passed(), "{}", r.to_text());

        let t = LinMap::new(QMatrix::from_i64(&[&[1, 0]]));
        let out = image(&t, &a, &ImageOptions::default()).unwrap();
        let r = verify_image(&t, &a, &out.polyhedron, Some(&out.certificates), &spec);
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.checks_run["certificates"] == 2);
    }

    #[test]
    fn corrupted_image_is_caught_at_the_boundary() {
        let spec = SampleSpec::new(3, 40, 2).unwrap();
        let t = LinMap::new(QMatrix::from_i64(&[&[1, 0]]));
        let corrupted = HPolyhedron::from_i64(1, &[(&[-1], 0), (&[1], 2)]);
        let r = verify_image(&t, &square(), &corrupted, None, &spec);
        assert!(!r.passed());
        let y = QVector::new(vec![ratio(3, 2)]);
        assert!(corrupted.contains(&y).unwrap());
        assert!(!feasible_with_equalities(&square(), &t, &y).unwrap());
        assert!(r.failures_for("completeness").count() > 0);
        assert!(r.to_text().contains("FAIL completeness"));
    }

    #[test]
    fn too_small_image_is_caught() {
        let spec = SampleSpec::new(5, 30, 2).unwrap();
        let t = LinMap::new(QMatrix::from_i64(&[&[1, 0]]));
        let shrunk = HPolyhedron::from_i64(1, &[(&[-1], 0), (&[2], 1)]);
        let r = verify_image(&t, &square(), &shrunk, None, &spec);
        assert!(r.failures_for("soundness").count() > 0);
    }

    #[test]
    fn verify_preimage_examples() {
        let spec = SampleSpec::new(11, 50, 3).unwrap();
        let t = LinMap::new(QMatrix::from_i64(&[&[1, 1]]));
        let whole = HPolyhedron::whole_space(1);
        let r = verify_preimage(&t, &whole, &preimage(&t, &whole).unwrap(), &spec);
        assert!(r.passed());

        let b = HPolyhedron::from_i64(1, &[(&[1], 1)]);
        let good = preimage(&t, &b).unwrap();
        assert!(verify_preimage(&t, &b, &good, &spec).passed());

        let bad = HPolyhedron::from_i64(2, &[(&[1, 1], 2)]);
        let r = verify_preimage(&t, &b, &bad, &spec);
        assert!(!r.passed());
        let w = &r.failures[0];
        assert_eq!((w.expected.as_str(), w.actual.as_str()), ("false", "true"));
    }

    #[test]
    fn report_is_deterministic_and_serializes() {
        let spec = SampleSpec::new(9, 20, 2).unwrap();
        let t = LinMap::new(QMatrix::from_i64(&[&[1, 0]]));
        let bad = HPolyhedron::from_i64(1, &[(&[-1], 0), (&[1], 2)]);
        let r1 = verify_image(&t, &square(), &bad, None, &spec);
        let r2 = verify_image(&t, &square(), &bad, None, &spec);
        assert_eq!(r1, r2);
        assert!(r1.to_json().contains("\"verdict\": \"fail\""));
    }

    #[test]
    fn dimension_mismatch_is_a_failure_not_a_panic() {
        let spec = SampleSpec::new(1, 5, 1).unwrap();
        let r = verify_image(&LinMap::identity(2), &square(), &HPolyhedron::whole_space(3), None, &spec);
        assert!(!r.passed());
        assert_eq!(r.failures[0].property, "dimensions");
    }
}
