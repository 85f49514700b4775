//! Machine-checkable validation of the surface arithmetic.
//!
//! Three facilities, all producing serializable reports:
//!
//! * [`run_identity_suite`] — checks every commuting diagram relating the
//!   surface maps to the curve group law, over an exhaustive or seeded
//!   random point set;
//! * [`scan_exceptional`] — enumerates the whole surface over a small prime
//!   and catalogs every point where some representative system vanishes,
//!   verifying the fallback against a lift-based evaluation at each one;
//! * [`count_ops`] — measures the field-operation cost of a code section
//!   through an instrumented field context, classified as multiplications,
//!   squarings, additions/subtractions, multiplications by the curve
//!   constant d, and inversions.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;

use crate::edwards::{CurveParams, EdwardsPoint};
use crate::error::{Error, Result};
pub use crate::field::{OpCount, OpCounter};
use crate::field::{projective_eq, FieldElement};
use crate::kummer1::{duplicate, project, K1Point};
use crate::kummer2::{
    iota, lift, p3p1_to_p7, p3p1_to_triple, p7_to_p3p1, phi0, phi0_via_lift, phi1, phi1_via_lift,
    project_pair, projection_z_forms, rho, rho_projection_reps, rho_segre_rep,
    rho_to_segre_direct, rho_via_lift, sigma, tau, tau_pi3_form_a, tau_pi3_form_b, tau_via_lift,
    triple_to_p3p1, K2Point, K2PointTriple,
};
use crate::ladder::{ladder_init, ladder_step, scalar_mul_ladder, LadderState};

type Check = std::result::Result<(), String>;

/// How a suite chooses its inputs.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Coverage {
    /// Every curve point, every pair, every surface point. Only feasible
    /// for small primes.
    Exhaustive,
    /// `samples` pseudorandom inputs per identity from a seeded generator;
    /// reproducible across runs.
    Random { samples: u64, seed: u64 },
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coverage::Exhaustive => write!(f, "exhaustive"),
            Coverage::Random { samples, seed } => {
                write!(f, "random(samples={samples}, seed={seed})")
            }
        }
    }
}

/// One failed case of one identity.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub identity: String,
    pub input: String,
    pub detail: String,
}

/// The outcome of checking one identity over the whole input set.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub name: String,
    pub cases: u64,
    pub failures: Vec<Failure>,
}

/// Everything one suite run learned.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    /// Decimal modulus.
    pub prime: String,
    /// Curve constant, lowercase hex.
    pub d: String,
    pub coverage: Coverage,
    pub identities: Vec<IdentityOutcome>,
}

impl IdentityReport {
    pub fn passing(&self) -> bool {
        self.identities.iter().all(|i| i.failures.is_empty())
    }

    pub fn total_cases(&self) -> u64 {
        self.identities.iter().map(|i| i.cases).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.identities.iter().map(|i| i.failures.len()).sum()
    }

    /// Human-readable multi-line rendering.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "identity suite over p = {}, d = 0x{} ({} coverage)\n",
            self.prime, self.d, self.coverage
        );
        for outcome in &self.identities {
            if outcome.failures.is_empty() {
                out.push_str(&format!(
                    "  ok   {:<34} {:>8} cases\n",
                    outcome.name, outcome.cases
                ));
            } else {
                out.push_str(&format!(
                    "  FAIL {:<34} {:>8} cases, {} failures\n",
                    outcome.name,
                    outcome.cases,
                    outcome.failures.len()
                ));
                for f in &outcome.failures {
                    out.push_str(&format!("       at {}: {}\n", f.input, f.detail));
                }
            }
        }
        out.push_str(&format!(
            "summary: {} identities, {} cases, {} failures\n",
            self.identities.len(),
            self.total_cases(),
            self.total_failures()
        ));
        out
    }

    /// One self-describing JSON object per line: a header, then each
    /// identity.
    pub fn record_lines(&self) -> Vec<String> {
        let mut lines = vec![json!({
            "kind": "identity_report",
            "prime": self.prime,
            "d": self.d,
            "coverage": self.coverage,
            "identities": self.identities.len(),
            "cases": self.total_cases(),
            "failures": self.total_failures(),
        })
        .to_string()];
        for outcome in &self.identities {
            lines.push(
                json!({
                    "kind": "identity",
                    "name": outcome.name,
                    "cases": outcome.cases,
                    "failures": outcome.failures,
                })
                .to_string(),
            );
        }
        lines
    }
}

/// Cap on stored failures per identity; the counter keeps counting.
const FAILURE_CAP: usize = 16;

#[derive(Default)]
struct Suite {
    identities: Vec<IdentityOutcome>,
}

impl Suite {
    fn run<T>(
        &mut self,
        name: &str,
        items: &[T],
        render: impl Fn(&T) -> String,
        mut check: impl FnMut(&T) -> Check,
    ) {
        let mut outcome = IdentityOutcome {
            name: name.to_owned(),
            cases: 0,
            failures: Vec::new(),
        };
        let mut dropped = 0usize;
        for item in items {
            outcome.cases += 1;
            if let Err(detail) = check(item) {
                if outcome.failures.len() < FAILURE_CAP {
                    outcome.failures.push(Failure {
                        identity: name.to_owned(),
                        input: render(item),
                        detail,
                    });
                } else {
                    dropped += 1;
                }
            }
        }
        if dropped > 0 {
            outcome.failures.push(Failure {
                identity: name.to_owned(),
                input: "...".to_owned(),
                detail: format!("{dropped} further failures not recorded"),
            });
        }
        self.identities.push(outcome);
    }
}

/// All curve points, found by scanning y-coordinates. Requires a complete
/// curve (so the point set is exactly the affine points) and a small prime.
pub fn enumerate_points(params: &CurveParams) -> Result<Vec<EdwardsPoint>> {
    if !params.is_complete() {
        return Err(Error::IncompleteCurve);
    }
    let f = params.field();
    if f.modulus().bits() > 13 {
        return Err(Error::InvalidParameter(
            "point enumeration needs a prime of at most 13 bits".to_owned(),
        ));
    }
    let p: u64 = f.modulus().try_into().expect("13-bit modulus fits in u64");
    let mut out = Vec::new();
    for a in 0..p {
        let y = K1Point::new(f.one(), f.element_u64(a))?;
        match params.lift_from_y(&y, false) {
            Ok(pt) => {
                if !pt.x1().is_zero() {
                    out.push(pt.negate());
                }
                out.push(pt);
            }
            Err(Error::NonSquare) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Every point of the surface over a small prime, twist classes included:
/// for each pair of P^1 coordinates, the Z-fiber is read off the surface
/// relation C Z0^2 = B Z1^2.
pub fn enumerate_k2_points(params: &CurveParams) -> Result<Vec<K2Point>> {
    if !params.is_complete() {
        return Err(Error::IncompleteCurve);
    }
    let f = params.field();
    if f.modulus().bits() > 13 {
        return Err(Error::InvalidParameter(
            "surface enumeration needs a prime of at most 13 bits".to_owned(),
        ));
    }
    let p: u64 = f.modulus().try_into().expect("13-bit modulus fits in u64");
    let mut line = Vec::with_capacity(p as usize + 1);
    for a in 0..p {
        line.push(K1Point::new(f.one(), f.element_u64(a))?);
    }
    line.push(K1Point::new(f.zero(), f.one())?);

    let weight = |k: &K1Point| {
        let (a, b) = k.coords();
        let asq = a.square();
        let bsq = b.square();
        (&asq - &bsq, &asq - &params.mul_by_d(&bsq))
    };

    let mut out = Vec::new();
    for x in &line {
        let (cx, bx) = weight(x);
        for y in &line {
            let (cy, by) = weight(y);
            let c = &cx * &cy;
            let b = &bx * &by;
            let z = if c.is_zero() && b.is_zero() {
                // Impossible over a complete curve; skip defensively.
                continue;
            } else if c.is_zero() {
                vec![(f.one(), f.zero())]
            } else if b.is_zero() {
                vec![(f.zero(), f.one())]
            } else {
                let ratio = &c * &b.inv()?;
                match ratio.sqrt() {
                    Ok(r) => vec![(f.one(), -&r), (f.one(), r)],
                    Err(Error::NonSquare) => continue,
                    Err(e) => return Err(e),
                }
            };
            for zi in z {
                let t = K2PointTriple::new(params, x.clone(), y.clone(), zi)?;
                out.push(triple_to_p3p1(params, &t));
            }
        }
    }
    Ok(out)
}

/// A uniform-ish surface point from a seeded generator; covers twist
/// classes and the charts at infinity of both P^1 factors.
pub fn random_k2_point<R: Rng + ?Sized>(params: &CurveParams, rng: &mut R) -> K2Point {
    let f = params.field();
    let random_line_point = |rng: &mut R| {
        if rng.gen_ratio(1, 32) {
            K1Point::from_parts(f.zero(), f.one())
        } else {
            K1Point::from_parts(f.one(), f.random_element(rng))
        }
    };
    loop {
        let x = random_line_point(rng);
        let y = random_line_point(rng);
        let weight = |k: &K1Point| {
            let (a, b) = k.coords();
            let asq = a.square();
            let bsq = b.square();
            (&asq - &bsq, &asq - &params.mul_by_d(&bsq))
        };
        let (cx, bx) = weight(&x);
        let (cy, by) = weight(&y);
        let c = &cx * &cy;
        let b = &bx * &by;
        let z = if c.is_zero() && b.is_zero() {
            continue;
        } else if c.is_zero() {
            (f.one(), f.zero())
        } else if b.is_zero() {
            (f.zero(), f.one())
        } else {
            let ratio = &c * &b.inv().expect("nonzero");
            match ratio.sqrt() {
                Ok(r) => {
                    if rng.gen() {
                        (f.one(), -&r)
                    } else {
                        (f.one(), r)
                    }
                }
                Err(_) => continue,
            }
        };
        let t = K2PointTriple::from_parts(params, x, y, z);
        return triple_to_p3p1(params, &t);
    }
}

struct SampleSets {
    points: Vec<EdwardsPoint>,
    pairs: Vec<(EdwardsPoint, EdwardsPoint)>,
    surface: Vec<K2Point>,
    ladder_cases: Vec<(BigUint, EdwardsPoint)>,
    line_cases: Vec<(BigUint, K1Point)>,
}

impl SampleSets {
    fn exhaustive(params: &CurveParams) -> Result<SampleSets> {
        let points = enumerate_points(params)?;
        let surface = enumerate_k2_points(params)?;
        let mut pairs = Vec::with_capacity(points.len() * points.len());
        for p in &points {
            for q in &points {
                pairs.push((p.clone(), q.clone()));
            }
        }
        let order = points.len() as u64;
        let mut ladder_cases = Vec::new();
        for p in &points {
            for n in 1..=(order + 1) {
                ladder_cases.push((BigUint::from(n), p.clone()));
            }
        }
        let f = params.field();
        let prime: u64 = f.modulus().try_into().expect("small modulus");
        let mut line = Vec::new();
        for a in 0..prime {
            line.push(K1Point::new(f.one(), f.element_u64(a))?);
        }
        line.push(K1Point::new(f.zero(), f.one())?);
        let mut line_cases = Vec::new();
        for y in &line {
            for n in 1u64..=12 {
                line_cases.push((BigUint::from(n), y.clone()));
            }
        }
        Ok(SampleSets {
            points,
            pairs,
            surface,
            ladder_cases,
            line_cases,
        })
    }

    fn random(params: &CurveParams, samples: usize, seed: u64) -> SampleSets {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let f = params.field();
        let two_p = f.modulus() * 2u32;
        let random_scalar =
            |rng: &mut ChaCha20Rng| rng.gen_biguint_below(&two_p) + BigUint::from(1u32);
        let points: Vec<EdwardsPoint> =
            (0..samples).map(|_| params.random_point(&mut rng)).collect();
        let pairs = (0..samples)
            .map(|_| (params.random_point(&mut rng), params.random_point(&mut rng)))
            .collect();
        let surface = (0..samples)
            .map(|_| random_k2_point(params, &mut rng))
            .collect();
        let ladder_cases = (0..samples)
            .map(|_| (random_scalar(&mut rng), params.random_point(&mut rng)))
            .collect();
        let line_cases = (0..samples)
            .map(|_| {
                let n = rng.gen_biguint_below(f.modulus()) + BigUint::from(1u32);
                let y = if rng.gen_ratio(1, 32) {
                    K1Point::from_parts(f.zero(), f.one())
                } else {
                    K1Point::from_parts(f.one(), f.random_element(&mut rng))
                };
                (n, y)
            })
            .collect();
        SampleSets {
            points,
            pairs,
            surface,
            ladder_cases,
            line_cases,
        }
    }
}

fn err_str(label: &str) -> impl Fn(Error) -> String + '_ {
    move |e| format!("{label}: {e}")
}

/// Checks every identity relating the surface maps to the curve group law.
/// Requires a complete curve (the group-law oracle needs one).
pub fn run_identity_suite(params: &CurveParams, coverage: Coverage) -> Result<IdentityReport> {
    run_identity_suite_impl(params, coverage, false)
}

/// Test hook: when `inject_fault` is set, a deliberately false identity is
/// appended so callers can confirm failures are detected and reported.
#[doc(hidden)]
pub fn run_identity_suite_with_fault(
    params: &CurveParams,
    coverage: Coverage,
    inject_fault: bool,
) -> Result<IdentityReport> {
    run_identity_suite_impl(params, coverage, inject_fault)
}

fn run_identity_suite_impl(
    params: &CurveParams,
    coverage: Coverage,
    inject_fault: bool,
) -> Result<IdentityReport> {
    if !params.is_complete() {
        return Err(Error::IncompleteCurve);
    }
    let sets = match coverage {
        Coverage::Exhaustive => SampleSets::exhaustive(params)?,
        Coverage::Random { samples, seed } => SampleSets::random(params, samples as usize, seed),
    };
    let mut suite = Suite::default();

    let pi = |p: &EdwardsPoint, q: &EdwardsPoint| -> std::result::Result<K2Point, String> {
        let t = project_pair(params, p, q).map_err(err_str("project_pair"))?;
        Ok(triple_to_p3p1(params, &t))
    };
    let render_pair = |(p, q): &(EdwardsPoint, EdwardsPoint)| format!("({p});({q})");
    let render_point = |p: &EdwardsPoint| format!("({p})");
    let render_surface = |k: &K2Point| format!("({k})");
    let render_ladder = |(n, p): &(BigUint, EdwardsPoint)| format!("n={n}, P=({p})");
    let render_line = |(n, y): &(BigUint, K1Point)| format!("n={n}, y=({y})");

    suite.run("projection.valid", &sets.pairs, render_pair, |(p, q)| {
        let t = project_pair(params, p, q).map_err(err_str("project_pair"))?;
        if !t.is_valid(params) {
            return Err("triple fails its relation".into());
        }
        let k = triple_to_p3p1(params, &t);
        if !k.is_valid(params) {
            return Err("Segre image fails its relations".into());
        }
        let s = p3p1_to_p7(params, &k).map_err(err_str("p3p1_to_p7"))?;
        if !s.is_valid(params) {
            return Err("P^7 image fails its relations".into());
        }
        Ok(())
    });

    suite.run(
        "projection.z_forms_agree",
        &sets.pairs,
        render_pair,
        |(p, q)| {
            let t = project_pair(params, p, q).map_err(err_str("project_pair"))?;
            let (z0, z1) = t.z();
            for (i, (a, b)) in projection_z_forms(p, q).into_iter().enumerate() {
                if a.is_zero() && b.is_zero() {
                    continue;
                }
                if !projective_eq(&[&a, &b], &[z0, z1]) {
                    return Err(format!("form {} gives ({a}:{b}), chose ({z0}:{z1})", i + 1));
                }
            }
            Ok(())
        },
    );

    suite.run("models.roundtrip", &sets.pairs, render_pair, |(p, q)| {
        let t = project_pair(params, p, q).map_err(err_str("project_pair"))?;
        let k = triple_to_p3p1(params, &t);
        if p3p1_to_triple(params, &k) != t {
            return Err("triple -> P^3xP^1 -> triple is not the identity".into());
        }
        let s = p3p1_to_p7(params, &k).map_err(err_str("p3p1_to_p7"))?;
        let back = p7_to_p3p1(params, &s).map_err(err_str("p7_to_p3p1"))?;
        if back != k {
            return Err("P^3xP^1 -> P^7 -> P^3xP^1 is not the identity".into());
        }
        Ok(())
    });

    suite.run("sigma.swaps_factors", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        if sigma(&k) != pi(q, p)? {
            return Err("sigma(pi(P,Q)) != pi(Q,P)".into());
        }
        if sigma(&sigma(&k)) != k {
            return Err("sigma is not an involution".into());
        }
        Ok(())
    });

    suite.run(
        "iota.negates_one_factor",
        &sets.pairs,
        render_pair,
        |(p, q)| {
            let k = pi(p, q)?;
            let i = iota(&k);
            if i != pi(&p.negate(), q)? {
                return Err("iota(pi(P,Q)) != pi(-P,Q)".into());
            }
            if i != pi(p, &q.negate())? {
                return Err("iota(pi(P,Q)) != pi(P,-Q)".into());
            }
            if iota(&i) != k {
                return Err("iota is not an involution".into());
            }
            Ok(())
        },
    );

    suite.run("rho.diagram", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let sum = params.add(p, q).map_err(err_str("add"))?;
        let diff = params.add(p, &q.negate()).map_err(err_str("add"))?;
        let got = rho(params, &k).map_err(err_str("rho"))?;
        if got != pi(&sum, &diff)? {
            return Err("rho(pi(P,Q)) != pi(P+Q, P-Q)".into());
        }
        Ok(())
    });

    suite.run("rho.squared_doubles", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let twice = rho(params, &rho(params, &k).map_err(err_str("rho"))?)
            .map_err(err_str("rho^2"))?;
        let dp = params.double(p).map_err(err_str("double"))?;
        let dq = params.double(q).map_err(err_str("double"))?;
        if twice != pi(&dp, &dq)? {
            return Err("rho . rho != doubling on both factors".into());
        }
        Ok(())
    });

    suite.run(
        "rho.segre_direct_agrees",
        &sets.pairs,
        render_pair,
        |(p, q)| {
            let k = pi(p, q)?;
            let rep = rho_to_segre_direct(params, &k).map_err(err_str("rho_to_segre_direct"))?;
            let r = rho(params, &k).map_err(err_str("rho"))?;
            if !projective_eq(&[&rep[0], &rep[1], &rep[2], &rep[3]], &r.u()) {
                return Err("bidegree-(2,1) expression disagrees with rho".into());
            }
            Ok(())
        },
    );

    suite.run("tau.diagram", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let sum = params.add(p, q).map_err(err_str("add"))?;
        let got = tau(params, &k).map_err(err_str("tau"))?;
        if got != pi(&sum, q)? {
            return Err("tau(pi(P,Q)) != pi(P+Q, Q)".into());
        }
        Ok(())
    });

    suite.run("phi0.diagram", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let dp = params.double(p).map_err(err_str("double"))?;
        let sum = params.add(p, q).map_err(err_str("add"))?;
        let got = phi0(params, &k).map_err(err_str("phi0"))?;
        if got != pi(&dp, &sum)? {
            return Err("phi0(pi(P,Q)) != pi(2P, P+Q)".into());
        }
        Ok(())
    });

    suite.run("phi1.diagram", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let dq = params.double(q).map_err(err_str("double"))?;
        let sum = params.add(p, q).map_err(err_str("add"))?;
        let got = phi1(params, &k).map_err(err_str("phi1"))?;
        if got != pi(&sum, &dq)? {
            return Err("phi1(pi(P,Q)) != pi(P+Q, 2Q)".into());
        }
        Ok(())
    });

    suite.run(
        "kummer_line.duplicate_commutes",
        &sets.points,
        render_point,
        |p| {
            let dbl = params.double(p).map_err(err_str("double"))?;
            let got = duplicate(params, &project(p)).map_err(err_str("duplicate"))?;
            if got != project(&dbl) {
                return Err("duplicate(y(P)) != y(2P)".into());
            }
            Ok(())
        },
    );

    suite.run("lift.section", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let (lp, lq) = lift(params, &k).map_err(err_str("lift"))?;
        if !lp.x1().is_even() {
            return Err("lifted x_P is not the even representative".into());
        }
        if pi(&lp, &lq)? != k {
            return Err("project_pair(lift(k)) != k".into());
        }
        Ok(())
    });

    suite.run("maps.via_lift_agree", &sets.pairs, render_pair, |(p, q)| {
        let k = pi(p, q)?;
        let direct = [
            ("rho", rho(params, &k), rho_via_lift(params, &k)),
            ("tau", tau(params, &k), tau_via_lift(params, &k)),
            ("phi0", phi0(params, &k), phi0_via_lift(params, &k)),
            ("phi1", phi1(params, &k), phi1_via_lift(params, &k)),
        ];
        for (name, a, b) in direct {
            let a = a.map_err(err_str(name))?;
            let b = b.map_err(err_str(name))?;
            if a != b {
                return Err(format!("{name} disagrees with its lift-based evaluation"));
            }
        }
        Ok(())
    });

    suite.run("surface.closure", &sets.surface, render_surface, |k| {
        for (name, v) in [
            ("sigma", Ok(sigma(k))),
            ("iota", Ok(iota(k))),
            ("rho", rho(params, k)),
            ("tau", tau(params, k)),
            ("phi0", phi0(params, k)),
            ("phi1", phi1(params, k)),
        ] {
            let v = v.map_err(err_str(name))?;
            if !v.is_valid(params) {
                return Err(format!("{name} output leaves the surface"));
            }
        }
        Ok(())
    });

    suite.run(
        "surface.conjugation_relations",
        &sets.surface,
        render_surface,
        |k| {
            let r = rho(params, k).map_err(err_str("rho"))?;
            let ri = rho(params, &iota(k)).map_err(err_str("rho.iota"))?;
            if ri != sigma(&r) {
                return Err("rho . iota != sigma . rho".into());
            }
            let rs = rho(params, &sigma(k)).map_err(err_str("rho.sigma"))?;
            if rs != iota(&r) {
                return Err("rho . sigma != iota . rho".into());
            }
            Ok(())
        },
    );

    suite.run(
        "surface.p7_roundtrip",
        &sets.surface,
        render_surface,
        |k| {
            let s = p3p1_to_p7(params, k).map_err(err_str("p3p1_to_p7"))?;
            if !s.is_valid(params) {
                return Err("P^7 image fails its relations".into());
            }
            let back = p7_to_p3p1(params, &s).map_err(err_str("p7_to_p3p1"))?;
            if &back != k {
                return Err("P^7 roundtrip is not the identity".into());
            }
            Ok(())
        },
    );

    suite.run(
        "surface.scale_invariance",
        &sets.surface,
        render_surface,
        |k| {
            let f = params.field();
            let lam = f.element_u64(2);
            let mu = f.element_u64(3);
            let u = k.u();
            let (z0, z1) = k.z();
            let scaled = K2Point::new(
                params,
                [u[0] * &lam, u[1] * &lam, u[2] * &lam, u[3] * &lam],
                (z0 * &mu, z1 * &mu),
            )
            .map_err(err_str("scaling"))?;
            let a = rho(params, k).map_err(err_str("rho"))?;
            let b = rho(params, &scaled).map_err(err_str("rho(scaled)"))?;
            if a != b {
                return Err("rho is not scale invariant".into());
            }
            let a = tau(params, k).map_err(err_str("tau"))?;
            let b = tau(params, &scaled).map_err(err_str("tau(scaled)"))?;
            if a != b {
                return Err("tau is not scale invariant".into());
            }
            Ok(())
        },
    );

    suite.run(
        "ladder.matches_oracle",
        &sets.ladder_cases,
        render_ladder,
        |(n, p)| {
            let want = project(&params.scalar_mul(n, p).map_err(err_str("scalar_mul"))?);
            let got = scalar_mul_ladder(params, n, &project(p)).map_err(err_str("ladder"))?;
            if got != want {
                return Err(format!("ladder gives ({got}), oracle gives ({want})"));
            }
            Ok(())
        },
    );

    let trace_cases: Vec<(BigUint, EdwardsPoint)> = sets
        .ladder_cases
        .iter()
        .step_by(7)
        .cloned()
        .collect();
    suite.run(
        "ladder.tracks_pair",
        &trace_cases,
        render_ladder,
        |(n, p)| {
            let mut state = LadderState::new(ladder_init(params, &project(p)));
            let mut acc = params.identity();
            for i in (0..n.bits()).rev() {
                let bit = n.bit(i);
                state
                    .advance(params, bit)
                    .map_err(err_str("ladder step"))?;
                acc = params.double(&acc).map_err(err_str("double"))?;
                if bit {
                    acc = params.add(&acc, p).map_err(err_str("add"))?;
                }
                let next = params.add(&acc, p).map_err(err_str("add"))?;
                if state.value() != &pi(&acc, &next)? {
                    return Err(format!(
                        "state after step {} is not pi(mP, (m+1)P)",
                        state.position()
                    ));
                }
            }
            Ok(())
        },
    );

    suite.run(
        "ladder.twist_identities",
        &sets.line_cases,
        render_line,
        |(n, y)| {
            let one = scalar_mul_ladder(params, &BigUint::from(1u32), y)
                .map_err(err_str("ladder(1)"))?;
            if &one != y {
                return Err("ladder(1, y) != y".into());
            }
            let a = scalar_mul_ladder(params, n, y).map_err(err_str("ladder(n)"))?;
            let b = scalar_mul_ladder(params, &(n * 2u32), y).map_err(err_str("ladder(2n)"))?;
            if b != duplicate(params, &a).map_err(err_str("duplicate"))? {
                return Err("ladder(2n, y) != duplicate(ladder(n, y))".into());
            }
            Ok(())
        },
    );

    if inject_fault {
        // A deliberately false identity over the first surface point with
        // Z1 != 0: iota moves such points, so claiming iota(k) == k must
        // produce a reported failure. Exists so callers can check that this
        // harness actually detects and reports discrepancies.
        let canary: Vec<K2Point> = sets
            .surface
            .iter()
            .find(|k| !k.z().1.is_zero())
            .cloned()
            .into_iter()
            .collect();
        suite.run("fault_injection.canary", &canary, render_surface, |k| {
            if &iota(k) != k {
                return Err("injected fault: iota(k) != k as expected".into());
            }
            Ok(())
        });
        if canary.is_empty() {
            suite.identities.push(IdentityOutcome {
                name: "fault_injection.canary".to_owned(),
                cases: 0,
                failures: vec![Failure {
                    identity: "fault_injection.canary".to_owned(),
                    input: "-".to_owned(),
                    detail: "no surface point with Z1 != 0 in the sample set".to_owned(),
                }],
            });
        }
    }

    Ok(IdentityReport {
        prime: params.field().modulus().to_string(),
        d: params.d().to_hex(),
        coverage,
        identities: suite.identities,
    })
}

/// One cataloged zero of a representative system.
#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalRecord {
    /// Which representative vanished (e.g. "rho.segre.rep2").
    pub map: String,
    /// The surface point (or curve pair), normalized.
    pub point: String,
    /// What the implementation used instead.
    pub fallback: String,
    /// Whether the map output was confirmed against an independent
    /// evaluation at this point.
    pub verified: bool,
}

/// The full exceptional-point catalog of a small curve.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub prime: String,
    pub d: String,
    pub surface_points: u64,
    pub curve_pairs: u64,
    pub records: Vec<ExceptionalRecord>,
    pub unresolved: Vec<Failure>,
}

impl ScanReport {
    pub fn passing(&self) -> bool {
        self.unresolved.is_empty() && self.records.iter().all(|r| r.verified)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "exceptional-point scan over p = {}, d = 0x{}: {} surface points, {} curve pairs\n",
            self.prime, self.d, self.surface_points, self.curve_pairs
        );
        if self.records.is_empty() {
            out.push_str("  no representative vanishes anywhere\n");
        }
        for r in &self.records {
            out.push_str(&format!(
                "  {} {:<18} at {} -> {}\n",
                if r.verified { "ok  " } else { "FAIL" },
                r.map,
                r.point,
                r.fallback
            ));
        }
        for f in &self.unresolved {
            out.push_str(&format!("  UNRESOLVED {} at {}: {}\n", f.identity, f.input, f.detail));
        }
        out.push_str(&format!(
            "summary: {} records, {} unresolved\n",
            self.records.len(),
            self.unresolved.len()
        ));
        out
    }

    pub fn record_lines(&self) -> Vec<String> {
        let mut lines = vec![json!({
            "kind": "scan_report",
            "prime": self.prime,
            "d": self.d,
            "surface_points": self.surface_points,
            "curve_pairs": self.curve_pairs,
            "records": self.records.len(),
            "unresolved": self.unresolved.len(),
        })
        .to_string()];
        for r in &self.records {
            lines.push(
                json!({
                    "kind": "exceptional",
                    "map": r.map,
                    "point": r.point,
                    "fallback": r.fallback,
                    "verified": r.verified,
                })
                .to_string(),
            );
        }
        for f in &self.unresolved {
            lines.push(
                json!({
                    "kind": "unresolved",
                    "map": f.identity,
                    "point": f.input,
                    "detail": f.detail,
                })
                .to_string(),
            );
        }
        lines
    }
}

/// Compares a map value against its lift-based evaluation; twist points
/// (where the lift has no preimage) fall back to a surface-membership check.
fn confirm_against_lift(
    params: &CurveParams,
    got: &K2Point,
    via: Result<K2Point>,
) -> std::result::Result<(), String> {
    if !got.is_valid(params) {
        return Err("output leaves the surface".into());
    }
    match via {
        Ok(w) => {
            if &w == got {
                Ok(())
            } else {
                Err("disagrees with lift-based evaluation".into())
            }
        }
        Err(Error::NonSquare) | Err(Error::DivisionByZero) => Ok(()),
        Err(e) => Err(format!("lift-based evaluation failed: {e}")),
    }
}

fn zero_pair(p: &(FieldElement, FieldElement)) -> bool {
    p.0.is_zero() && p.1.is_zero()
}

/// Enumerates the whole surface (and all curve pairs) over a small prime
/// and catalogs every input where some representative vanishes — both the
/// first-tried representative of each map (a fallback fired) and the backup
/// one (the chart order mattered). Each cataloged point is re-verified
/// against an independent evaluation. `passing()` means the fallback system
/// is airtight for these parameters.
pub fn scan_exceptional(params: &CurveParams) -> Result<ScanReport> {
    let f = params.field();
    if f.modulus().bits() > 13 {
        return Err(Error::InvalidParameter(
            "exceptional scan enumerates the surface; the prime must be at most 13 bits"
                .to_owned(),
        ));
    }
    if !params.is_complete() {
        return Err(Error::IncompleteCurve);
    }
    let surface = enumerate_k2_points(params)?;
    let points = enumerate_points(params)?;
    let mut records: Vec<ExceptionalRecord> = Vec::new();
    let mut unresolved: Vec<Failure> = Vec::new();

    let push = |map: &str,
                    point: String,
                    fallback: String,
                    check: std::result::Result<(), String>,
                    unresolved: &mut Vec<Failure>,
                    records: &mut Vec<ExceptionalRecord>| {
        let verified = check.is_ok();
        if let Err(detail) = check {
            unresolved.push(Failure {
                identity: map.to_owned(),
                input: point.clone(),
                detail,
            });
        }
        records.push(ExceptionalRecord {
            map: map.to_owned(),
            point,
            fallback,
            verified,
        });
    };

    for k in &surface {
        let rendered = k.normalized().to_string();

        // The three projections of rho are single representatives: a zero
        // is a genuine exceptional point, resolvable only through the lift.
        let reps = rho_projection_reps(params, k);
        let rho_k = rho(params, k);
        for (i, rep) in reps.iter().enumerate() {
            if zero_pair(rep) {
                let via = rho_via_lift(params, k);
                let check = match &via {
                    Ok(v) if v.is_valid(params) => Ok(()),
                    Ok(_) => Err("lift evaluation leaves the surface".to_owned()),
                    Err(e) => Err(format!("no fallback succeeded: {e}")),
                };
                push(
                    &format!("rho.pi{}", i + 1),
                    rendered.clone(),
                    "lift-based evaluation".to_owned(),
                    check,
                    &mut unresolved,
                    &mut records,
                );
            }
        }
        match &rho_k {
            Ok(v) if v.is_valid(params) => {}
            Ok(_) => unresolved.push(Failure {
                identity: "rho".to_owned(),
                input: rendered.clone(),
                detail: "output leaves the surface".to_owned(),
            }),
            Err(e) => unresolved.push(Failure {
                identity: "rho".to_owned(),
                input: rendered.clone(),
                detail: format!("rho failed on a complete curve: {e}"),
            }),
        }

        // The two spanning representatives of the direct Segre expression.
        let rep1 = rho_segre_rep(params, k, false);
        let rep2 = rho_segre_rep(params, k, true);
        let rep1_zero = rep1.iter().all(|c| c.is_zero());
        let rep2_zero = rep2.iter().all(|c| c.is_zero());
        let segre_check = |used: &[FieldElement; 4]| -> std::result::Result<(), String> {
            match &rho_k {
                Ok(v) => {
                    if projective_eq(&[&used[0], &used[1], &used[2], &used[3]], &v.u()) {
                        Ok(())
                    } else {
                        Err("surviving representative disagrees with rho".into())
                    }
                }
                Err(e) => Err(format!("rho unavailable for comparison: {e}")),
            }
        };
        if rep1_zero && !rep2_zero {
            push(
                "rho.segre.rep1",
                rendered.clone(),
                "second representative".to_owned(),
                segre_check(&rep2),
                &mut unresolved,
                &mut records,
            );
        }
        if rep2_zero && !rep1_zero {
            push(
                "rho.segre.rep2",
                rendered.clone(),
                "first representative".to_owned(),
                segre_check(&rep1),
                &mut unresolved,
                &mut records,
            );
        }
        if rep1_zero && rep2_zero {
            unresolved.push(Failure {
                identity: "rho.segre".to_owned(),
                input: rendered.clone(),
                detail: "both representatives vanish".to_owned(),
            });
        }

        // pi2 of tau: the column pairs (U0:U2) and (U1:U3).
        let u = k.u();
        let tau_k = tau(params, k);
        let first_col_zero = u[0].is_zero() && u[2].is_zero();
        let second_col_zero = u[1].is_zero() && u[3].is_zero();
        let tau_check = |tau_k: &Result<K2Point>| match tau_k {
            Ok(v) => confirm_against_lift(params, v, tau_via_lift(params, k)),
            Err(e) => Err(format!("tau failed: {e}")),
        };
        if first_col_zero && !second_col_zero {
            push(
                "tau.pi2.form1",
                rendered.clone(),
                "(U1:U3)".to_owned(),
                tau_check(&tau_k),
                &mut unresolved,
                &mut records,
            );
        }
        if second_col_zero && !first_col_zero {
            push(
                "tau.pi2.form2",
                rendered.clone(),
                "(U0:U2)".to_owned(),
                tau_check(&tau_k),
                &mut unresolved,
                &mut records,
            );
        }

        // pi3 of tau: the two bidegree forms.
        let form_a = tau_pi3_form_a(params, k);
        let form_b = tau_pi3_form_b(params, k);
        if zero_pair(&form_a) && !zero_pair(&form_b) {
            push(
                "tau.pi3.form_a",
                rendered.clone(),
                format!("second form ({}:{})", form_b.0, form_b.1),
                tau_check(&tau_k),
                &mut unresolved,
                &mut records,
            );
        }
        if zero_pair(&form_b) && !zero_pair(&form_a) {
            push(
                "tau.pi3.form_b",
                rendered.clone(),
                "first form".to_owned(),
                tau_check(&tau_k),
                &mut unresolved,
                &mut records,
            );
        }
        if zero_pair(&form_a) && zero_pair(&form_b) {
            unresolved.push(Failure {
                identity: "tau.pi3".to_owned(),
                input: rendered.clone(),
                detail: "both forms vanish".to_owned(),
            });
        }
        match &tau_k {
            Ok(v) if v.is_valid(params) => {}
            Ok(_) => unresolved.push(Failure {
                identity: "tau".to_owned(),
                input: rendered.clone(),
                detail: "output leaves the surface".to_owned(),
            }),
            Err(e) => unresolved.push(Failure {
                identity: "tau".to_owned(),
                input: rendered.clone(),
                detail: format!("tau failed on a complete curve: {e}"),
            }),
        }
    }

    // The quotient map: catalog pairs where the first z-form vanishes.
    for p in &points {
        for q in &points {
            let forms = projection_z_forms(p, q);
            if !zero_pair(&forms[0]) {
                continue;
            }
            let rendered = format!("({p});({q})");
            let used = forms.iter().position(|f| !zero_pair(f));
            match used {
                Some(j) => {
                    let check = match project_pair(params, p, q) {
                        Ok(t) if t.is_valid(params) => Ok(()),
                        Ok(_) => Err("triple fails its relation".to_owned()),
                        Err(e) => Err(format!("project_pair failed: {e}")),
                    };
                    push(
                        "project_pair.form1",
                        rendered,
                        format!("form {}", j + 1),
                        check,
                        &mut unresolved,
                        &mut records,
                    );
                }
                None => unresolved.push(Failure {
                    identity: "project_pair".to_owned(),
                    input: rendered,
                    detail: "all four z-forms vanish".to_owned(),
                }),
            }
        }
    }

    records.sort_by(|a, b| (&a.map, &a.point).cmp(&(&b.map, &b.point)));
    unresolved.sort_by(|a, b| (&a.identity, &a.input).cmp(&(&b.identity, &b.input)));

    Ok(ScanReport {
        prime: f.modulus().to_string(),
        d: params.d().to_hex(),
        surface_points: surface.len() as u64,
        curve_pairs: (points.len() * points.len()) as u64,
        records,
        unresolved,
    })
}

/// A measurable code section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    EdwardsAdd,
    EdwardsDouble,
    Duplicate,
    Rho,
    Tau,
    Phi0,
    Phi1,
    RhoSegre,
    LadderStep0,
    LadderStep1,
    Ladder,
}

impl Section {
    pub const ALL: [Section; 11] = [
        Section::EdwardsAdd,
        Section::EdwardsDouble,
        Section::Duplicate,
        Section::Rho,
        Section::Tau,
        Section::Phi0,
        Section::Phi1,
        Section::RhoSegre,
        Section::LadderStep0,
        Section::LadderStep1,
        Section::Ladder,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Section::EdwardsAdd => "edwards_add",
            Section::EdwardsDouble => "edwards_double",
            Section::Duplicate => "duplicate",
            Section::Rho => "rho",
            Section::Tau => "tau",
            Section::Phi0 => "phi0",
            Section::Phi1 => "phi1",
            Section::RhoSegre => "rho_segre",
            Section::LadderStep0 => "ladder_step0",
            Section::LadderStep1 => "ladder_step1",
            Section::Ladder => "ladder",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Section> {
        Section::ALL
            .into_iter()
            .find(|section| section.name() == s)
            .ok_or_else(|| Error::UnknownSection(s.to_owned()))
    }
}

/// Input for a measured section; the variant must match the section.
#[derive(Clone, Debug)]
pub enum SectionInput {
    Pair(EdwardsPoint, EdwardsPoint),
    Point(EdwardsPoint),
    Line(K1Point),
    Surface(K2Point),
    Ladder { n: BigUint, y: K1Point },
}

/// Runs one section under an instrumented field context and returns the
/// exact operation counts. Validation predicates and (in)equality tests use
/// untracked arithmetic, so the counts reflect the formulas alone.
pub fn count_ops(params: &CurveParams, section: Section, input: &SectionInput) -> Result<OpCount> {
    let (field, counter) = params.field().instrumented();
    let iparams = params.with_field(&field);
    counter.reset();
    match (section, input) {
        (Section::EdwardsAdd, SectionInput::Pair(p, q)) => {
            iparams.add(&p.in_field(&field), &q.in_field(&field))?;
        }
        (Section::EdwardsDouble, SectionInput::Point(p)) => {
            iparams.double(&p.in_field(&field))?;
        }
        (Section::Duplicate, SectionInput::Line(y)) => {
            duplicate(&iparams, &y.in_field(&field))?;
        }
        (Section::Rho, SectionInput::Surface(k)) => {
            rho(&iparams, &k.in_field(&field))?;
        }
        (Section::Tau, SectionInput::Surface(k)) => {
            tau(&iparams, &k.in_field(&field))?;
        }
        (Section::Phi0, SectionInput::Surface(k)) => {
            phi0(&iparams, &k.in_field(&field))?;
        }
        (Section::Phi1, SectionInput::Surface(k)) => {
            phi1(&iparams, &k.in_field(&field))?;
        }
        (Section::RhoSegre, SectionInput::Surface(k)) => {
            rho_to_segre_direct(&iparams, &k.in_field(&field))?;
        }
        (Section::LadderStep0, SectionInput::Surface(k)) => {
            ladder_step(&iparams, &k.in_field(&field), false)?;
        }
        (Section::LadderStep1, SectionInput::Surface(k)) => {
            ladder_step(&iparams, &k.in_field(&field), true)?;
        }
        (Section::Ladder, SectionInput::Ladder { n, y }) => {
            scalar_mul_ladder(&iparams, n, &y.in_field(&field))?;
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "section {section} does not take this input kind"
            )))
        }
    }
    Ok(counter.snapshot())
}
