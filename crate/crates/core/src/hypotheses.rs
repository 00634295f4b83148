//! Example catalog and the checkable hypotheses: equivariance, the
//! nonpositivity cone test, sign tests for quadratic moment maps and
//! Jacobian rank probes on the zero fibre.

use num_traits::{One, Zero};
use rand::Rng;

use crate::algebra::{GeneratorTable, GradedElement, Lie, Poisson, Var};
use crate::brst::equivariance_residuals;
use crate::error::{Error, Result};
use crate::linalg::dense;
use crate::rational::{q, qf, Q};
use crate::sampling::{small_rational, SeededRng};
use crate::setup::Setup;

#[derive(Clone, Debug)]
pub struct EquivarianceVerdict {
    pub holds: bool,
    pub residuals: Vec<(usize, usize, GradedElement)>,
}

/// `{J_a, J_b} = sum_c f^c_{ab} J_c`; when it holds the ideal is first
/// class by construction.
pub fn equivariance_first_class(setup: &Setup) -> EquivarianceVerdict {
    let residuals = equivariance_residuals(setup);
    EquivarianceVerdict { holds: residuals.is_empty(), residuals }
}

/// Feasibility of `A x <= b` over the rationals by Fourier-Motzkin
/// elimination.  Rows are `(a, b)`.
pub fn fourier_motzkin(rows: Vec<(Vec<Q>, Q)>, nvars: usize) -> bool {
    let mut rows = rows;
    for v in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.0[v].is_zero() {
                rest.push(r);
            } else if r.0[v] > Q::zero() {
                pos.push(r);
            } else {
                neg.push(r);
            }
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                let (sp, sn) = (q(1) / &pa[v], q(1) / -&na[v]);
                let a: Vec<Q> = pa.iter().zip(na).map(|(x, y)| x * &sp + y * &sn).collect();
                let b = pb * &sp + nb * &sn;
                if a.iter().all(Zero::is_zero) {
                    if b < Q::zero() {
                        return false;
                    }
                    continue;
                }
                rest.push((a, b));
            }
        }
        rest.sort();
        rest.dedup();
        rows = rest;
    }
    rows.iter().all(|(_, b)| *b >= Q::zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeVerdict {
    /// The cone generated by the weights equals their span.
    pub spans: bool,
    /// A weight whose negative is not in the cone.
    pub witness: Option<usize>,
}

/// Nonpositivity at the origin: `W` has one row per torus direction and
/// one column per complex coordinate; the columns generate the cone.
pub fn cone_test(weights: &[Vec<i64>]) -> ConeVerdict {
    let r = weights.len();
    let n = weights.first().map_or(0, |w| w.len());
    let col = |k: usize| -> Vec<Q> { (0..r).map(|i| q(weights[i][k])).collect() };
    for k in 0..n {
        let target = col(k);
        if target.iter().all(Zero::is_zero) {
            continue;
        }
        // lambda >= 0 with sum_j lambda_j w_j = -w_k
        let mut rows = Vec::new();
        for i in 0..r {
            let a: Vec<Q> = (0..n).map(|j| q(weights[i][j])).collect();
            rows.push((a.clone(), -target[i].clone()));
            rows.push((a.iter().map(|x| -x).collect(), target[i].clone()));
        }
        for j in 0..n {
            let mut a = vec![Q::zero(); n];
            a[j] = q(-1);
            rows.push((a, Q::zero()));
        }
        if !fourier_motzkin(rows, n) {
            return ConeVerdict { spans: false, witness: Some(k) };
        }
    }
    ConeVerdict { spans: true, witness: None }
}

/// Hessian of a quadratic base polynomial.
fn hessian(j: &GradedElement) -> Vec<Vec<Q>> {
    let n = j.table().base_dim();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let d = j.partial(Var::Base(a)).partial(Var::Base(b));
                    d.eval_scalar(&vec![Q::zero(); n])
                })
                .collect()
        })
        .collect()
}

fn det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let v = &a[c][k] * &f;
                a[r][k] -= v;
            }
        }
    }
    d
}

/// Semidefinite iff every principal minor has the right sign.
fn semidefinite(h: &[Vec<Q>], sign: i32) -> bool {
    let n = h.len();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Q>> = idx.iter().map(|&i| idx.iter().map(|&j| h[i][j].clone()).collect()).collect();
        let d = det(&sub);
        let want_pos = sign > 0 || idx.len() % 2 == 0;
        if (want_pos && d < Q::zero()) || (!want_pos && d > Q::zero()) {
            return false;
        }
    }
    true
}

/// Nonpositivity at the origin for a quadratic moment map: every nonzero
/// component combination must take both signs.  Decided exactly for one
/// constraint; for several constraints only the basis components are
/// tested, which is a necessary condition.
pub fn quadratic_sign_test(setup: &Setup) -> Option<bool> {
    for j in &setup.moment {
        if j.terms().keys().any(|m| m.base_degree(j.table()) != 2) {
            return None;
        }
        let h = hessian(j);
        if h.iter().all(|r| r.iter().all(Zero::is_zero)) {
            continue;
        }
        if semidefinite(&h, 1) || semidefinite(&h, -1) {
            return Some(false);
        }
    }
    Some(true)
}

#[derive(Clone, Debug)]
pub struct RankRow {
    pub point: Vec<Q>,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
    pub max_rank: usize,
    pub full_rank: usize,
    pub full_rank_attained: bool,
}

/// Exact Jacobian rank of the moment map at points of the zero fibre.
pub fn rank_probe(setup: &Setup, points: &[Vec<Q>]) -> Result<RankTable> {
    let n = setup.base_dim();
    let l = setup.l();
    let grads: Vec<Vec<GradedElement>> =
        setup.moment.iter().map(|j| (0..n).map(|i| j.partial(Var::Base(i))).collect()).collect();
    let mut rows = Vec::new();
    for p in points {
        if p.len() != n {
            return Err(Error::Argument(format!("point has {} coordinates, expected {n}", p.len())));
        }
        let vals: Vec<Q> = setup.moment.iter().map(|j| j.eval_scalar(p)).collect();
        if vals.iter().any(|v| !v.is_zero()) {
            let shown: Vec<String> = vals.iter().map(crate::rational::fmt_q).collect();
            return Err(Error::Argument(format!("point is not on the zero fibre: J = ({})", shown.join(", "))));
        }
        let m: Vec<Vec<Q>> = grads.iter().map(|g| g.iter().map(|d| d.eval_scalar(p)).collect()).collect();
        rows.push(RankRow { point: p.clone(), rank: dense::rank(&m) });
    }
    let max_rank = rows.iter().map(|r| r.rank).max().unwrap_or(0);
    Ok(RankTable { rows, max_rank, full_rank: l, full_rank_attained: max_rank == l })
}

/// Parameters of parametric catalog entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub alpha: i64,
    pub beta: i64,
}

impl Default for Params {
    fn default() -> Self {
        Params { n: 3, m: 2, alpha: -1, beta: 1 }
    }
}

/// Expected verdicts; `None` when not asserted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expected {
    pub nonpositivity: Option<bool>,
    pub generating: Option<bool>,
    pub complete_intersection: Option<bool>,
    pub regular_stratum: Option<bool>,
}

type Sampler = fn(&Setup, &Params, &mut SeededRng) -> Vec<Q>;

#[derive(Clone)]
pub struct Example {
    pub key: &'static str,
    pub title: &'static str,
    pub params: Params,
    pub setup: Setup,
    /// Weights at the origin in complex coordinates, for the cone test.
    pub cone_weights: Option<Vec<Vec<i64>>>,
    pub expected: Expected,
    sampler: Sampler,
}

impl std::fmt::Debug for Example {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Example({})", self.key)
    }
}

impl Example {
    /// `count` rational points on the zero fibre.
    pub fn sample(&self, rng: &mut SeededRng, count: usize) -> Vec<Vec<Q>> {
        (0..count).map(|_| (self.sampler)(&self.setup, &self.params, rng)).collect()
    }

    pub fn is_parametric(&self) -> bool {
        matches!(self.key, "angular-momentum" | "planar-particles" | "torus-t2" | "commuting-variety")
    }
}

pub const KEYS: [&str; 9] = [
    "harmonic-oscillator",
    "free-particle",
    "standard-example",
    "angular-momentum",
    "planar-particles",
    "resonance",
    "torus-t2",
    "commuting-variety",
    "linear-poisson",
];

fn var(t: &std::sync::Arc<GeneratorTable>, i: usize) -> GradedElement {
    GradedElement::base_var(t, i)
}

fn sq(x: &GradedElement) -> GradedElement {
    x * x
}

/// `sum_k w_k |z_k|^2 * c` with `z_k = x_k + i x_{n+k}`.
fn weighted_norm(t: &std::sync::Arc<GeneratorTable>, w: &[i64], c: Q) -> GradedElement {
    let n = w.len();
    let mut out = GradedElement::zero(t);
    for (k, &wk) in w.iter().enumerate() {
        out.add_scaled(&(q(wk) * &c), &(&sq(&var(t, k)) + &sq(&var(t, n + k))));
    }
    out
}

/// Flip the moment map when the bracket sign convention asks for it.
fn oriented(name: &str, poisson: Poisson, lie: Lie, moment: Vec<GradedElement>) -> Result<Setup> {
    let s = Setup::new(name, poisson.clone(), lie.clone(), moment.clone())?;
    if equivariance_residuals(&s).is_empty() {
        return Ok(s);
    }
    let flipped = Setup::new(name, poisson, lie, moment.iter().map(|j| -j).collect())?;
    if equivariance_residuals(&flipped).is_empty() {
        Ok(flipped)
    } else {
        Err(Error::Internal(format!("{name}: moment map is not equivariant in either orientation")))
    }
}

/// `so(n)` on the basis `E_ab = e_a e_b^T - e_b e_a^T`, `a < b`.
pub fn so_n(n: usize) -> Lie {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let idx = |a: usize, b: usize| -> Option<(usize, i64)> {
        if a == b {
            None
        } else if a < b {
            Some((pairs.iter().position(|&p| p == (a, b)).expect("pair"), 1))
        } else {
            Some((pairs.iter().position(|&p| p == (b, a)).expect("pair"), -1))
        }
    };
    let dim = pairs.len();
    let mut f = vec![Q::zero(); dim * dim * dim];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for (j, &(c, d)) in pairs.iter().enumerate() {
            let mut add = |x: usize, y: usize, s: i64| {
                if let Some((k, e)) = idx(x, y) {
                    f[(i * dim + j) * dim + k] += q(s * e);
                }
            };
            if b == c {
                add(a, d, 1);
            }
            if a == c {
                add(b, d, -1);
            }
            if b == d {
                add(a, c, -1);
            }
            if a == d {
                add(b, c, 1);
            }
        }
    }
    Lie::new(dim, f).expect("so(n) satisfies Jacobi")
}

fn harmonic_oscillator() -> Result<Example> {
    let t = GeneratorTable::base(2);
    let j = weighted_norm(&t, &[1], qf(1, 2));
    let setup = Setup::new("harmonic-oscillator", Poisson::canonical(1), Lie::abelian(1), vec![j])?
        .with_torus_weights(vec![vec![1]])?;
    Ok(Example {
        key: "harmonic-oscillator",
        title: "Harmonic oscillator, S^1 on C",
        params: Params::default(),
        setup,
        cone_weights: Some(vec![vec![1]]),
        expected: Expected {
            nonpositivity: Some(false),
            generating: Some(false),
            complete_intersection: Some(true),
            regular_stratum: Some(false),
        },
        sampler: |s, _, _| vec![Q::zero(); s.base_dim()],
    })
}

fn free_particle() -> Result<Example> {
    let t = GeneratorTable::base(2);
    let j = sq(&var(&t, 1)).scale(&qf(1, 2));
    let setup = Setup::new("free-particle", Poisson::canonical(1), Lie::abelian(1), vec![j])?;
    Ok(Example {
        key: "free-particle",
        title: "Free particle on the line, J = p^2 / 2",
        params: Params::default(),
        setup,
        cone_weights: None,
        expected: Expected {
            nonpositivity: Some(false),
            generating: Some(false),
            complete_intersection: Some(true),
            regular_stratum: Some(false),
        },
        sampler: |_, _, rng| vec![small_rational(rng), Q::zero()],
    })
}

/// Standard example for a subalgebra of `u(n)` given by skew-Hermitian
/// generators `A + i S` (`A` antisymmetric, `S` symmetric):
/// `J = -1/2 sum (A_ij (x_i y_j - x_j y_i) + S_ij (x_i x_j + y_i y_j))`.
pub fn standard_example(generators: &[(Vec<Vec<Q>>, Vec<Vec<Q>>)]) -> Result<Setup> {
    let n = generators.first().map_or(0, |g| g.0.len());
    let t = GeneratorTable::base(2 * n);
    let x = |i| var(&t, i);
    let y = |i| var(&t, n + i);
    let mut moment = Vec::new();
    for (a, s) in generators {
        let mut j = GradedElement::zero(&t);
        for i in 0..n {
            for k in 0..n {
                if a[i][k] != a[k][i].clone() * q(-1) || s[i][k] != s[k][i] {
                    return Err(Error::Argument("generator is not skew-Hermitian".into()));
                }
                let rot = &(&x(i) * &y(k)) - &(&x(k) * &y(i));
                let sym = &(&x(i) * &x(k)) + &(&y(i) * &y(k));
                j.add_scaled(&(&a[i][k] * qf(-1, 2)), &rot);
                j.add_scaled(&(&s[i][k] * qf(-1, 2)), &sym);
            }
        }
        moment.push(j);
    }
    let lie = matrix_lie(generators)?;
    let setup = oriented("standard-example", Poisson::canonical(n), lie, moment)?;
    let diagonal = generators.iter().all(|(a, s)| {
        a.iter().flatten().all(Zero::is_zero)
            && (0..n).all(|i| (0..n).all(|k| i == k || s[i][k].is_zero()))
            && (0..n).all(|i| s[i][i].is_integer())
    });
    if diagonal {
        let w = generators.iter().map(|(_, s)| (0..n).map(|i| s[i][i].to_integer().try_into().unwrap_or(0)).collect()).collect();
        return setup.with_torus_weights(w);
    }
    Ok(setup)
}

/// Structure constants of a span of skew-Hermitian matrices, closed under
/// the commutator.
fn matrix_lie(generators: &[(Vec<Vec<Q>>, Vec<Vec<Q>>)]) -> Result<Lie> {
    let l = generators.len();
    let n = generators.first().map_or(0, |g| g.0.len());
    // complex matrix as (re, im); product (a + ib)(c + id)
    let mul = |p: &(Vec<Vec<Q>>, Vec<Vec<Q>>), r: &(Vec<Vec<Q>>, Vec<Vec<Q>>)| {
        let mut re = vec![vec![Q::zero(); n]; n];
        let mut im = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    re[i][j] += &p.0[i][k] * &r.0[k][j] - &p.1[i][k] * &r.1[k][j];
                    im[i][j] += &p.0[i][k] * &r.1[k][j] + &p.1[i][k] * &r.0[k][j];
                }
            }
        }
        (re, im)
    };
    let flat = |m: &(Vec<Vec<Q>>, Vec<Vec<Q>>)| -> Vec<Q> { m.0.iter().flatten().chain(m.1.iter().flatten()).cloned().collect() };
    let basis: Vec<Vec<Q>> = generators.iter().map(flat).collect();
    let mut f = vec![Q::zero(); l * l * l];
    for a in 0..l {
        for b in 0..l {
            let ab = mul(&generators[a], &generators[b]);
            let ba = mul(&generators[b], &generators[a]);
            let c: Vec<Q> = flat(&ab).iter().zip(flat(&ba)).map(|(x, y)| x - y).collect();
            let coeffs = solve_in_span(&basis, &c)
                .ok_or_else(|| Error::Argument("generators do not span a Lie subalgebra".into()))?;
            for (k, v) in coeffs.into_iter().enumerate() {
                f[(a * l + b) * l + k] = v;
            }
        }
    }
    Lie::new(l, f)
}

fn solve_in_span(basis: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    use crate::linalg::Echelon;
    let vecs: Vec<std::collections::BTreeMap<usize, Q>> = basis
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
        .collect();
    let ech = Echelon::from_vectors(vecs.iter());
    let t: std::collections::BTreeMap<usize, Q> =
        target.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
    let combo = ech.solve(&t)?;
    let mut out = vec![Q::zero(); basis.len()];
    for (i, c) in combo {
        out[i] = c;
    }
    Some(out)
}

fn standard_default() -> Result<Example> {
    let z = vec![vec![Q::zero(); 2]; 2];
    let s = vec![vec![q(1), q(0)], vec![q(0), q(-1)]];
    let setup = standard_example(&[(z, s)])?;
    Ok(Example {
        key: "standard-example",
        title: "Standard example, u(1) in u(2) with weights (1, -1)",
        params: Params::default(),
        setup,
        cone_weights: Some(vec![vec![1, -1]]),
        expected: Expected {
            nonpositivity: Some(true),
            generating: Some(true),
            complete_intersection: Some(true),
            regular_stratum: Some(true),
        },
        sampler: |_, _, rng| {
            // |z1| = |z2|: z2 = z1 rotated by a rational unit complex number
            let (a, b) = (small_rational(rng), small_rational(rng));
            let (c, s) = unit(rng);
            vec![a.clone(), &a * &c - &b * &s, b.clone(), &a * &s + &b * &c]
        },
    })
}

/// Rational point on the unit circle.
fn unit(rng: &mut SeededRng) -> (Q, Q) {
    let t = qf(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=4));
    let d = q(1) + &t * &t;
    ((q(1) - &t * &t) / &d, (q(2) * &t) / &d)
}

fn angular_momentum(n: usize) -> Result<Example> {
    if n < 2 {
        return Err(Error::Argument("angular momentum needs n >= 2".into()));
    }
    let t = GeneratorTable::base(2 * n);
    let mut moment = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            moment.push(&(&var(&t, a) * &var(&t, n + b)) - &(&var(&t, b) * &var(&t, n + a)));
        }
    }
    let setup = oriented("angular-momentum", Poisson::canonical(n), so_n(n), moment)?;
    Ok(Example {
        key: "angular-momentum",
        title: "One particle with zero angular momentum in dimension n",
        params: Params { n, ..Default::default() },
        setup,
        cone_weights: None,
        expected: Expected {
            nonpositivity: None,
            generating: Some(true),
            complete_intersection: Some(n < 3),
            regular_stratum: Some(n < 3),
        },
        sampler: |s, _, rng| {
            let n = s.base_dim() / 2;
            let v: Vec<Q> = (0..n).map(|_| small_rational(rng)).collect();
            let (l, m) = (small_rational(rng), small_rational(rng));
            v.iter().map(|x| x * &l).chain(v.iter().map(|x| x * &m)).collect()
        },
    })
}

fn planar_particles(m: usize) -> Result<Example> {
    if m == 0 {
        return Err(Error::Argument("need at least one particle".into()));
    }
    // q^1_i, q^2_i at 2i, 2i+1; momenta at 2m + 2i, 2m + 2i + 1
    let n = 2 * m;
    let t = GeneratorTable::base(2 * n);
    let mut j = GradedElement::zero(&t);
    for i in 0..m {
        j = &j + &(&(&var(&t, 2 * i) * &var(&t, n + 2 * i + 1)) - &(&var(&t, 2 * i + 1) * &var(&t, n + 2 * i)));
    }
    let setup = Setup::new("planar-particles", Poisson::canonical(n), Lie::abelian(1), vec![j])?;
    Ok(Example {
        key: "planar-particles",
        title: "m particles in the plane with zero total angular momentum",
        params: Params { m, ..Default::default() },
        setup,
        cone_weights: Some(vec![(0..m).flat_map(|_| [1, -1]).collect()]),
        expected: Expected {
            nonpositivity: Some(true),
            generating: Some(true),
            complete_intersection: Some(true),
            regular_stratum: Some(true),
        },
        sampler: |s, _, rng| {
            let d = s.base_dim();
            let n = d / 2;
            let mut p: Vec<Q> = (0..d).map(|_| small_rational(rng)).collect();
            // solve J = 0 for the second momentum of particle 0: q^1_0 p^0_2 = q^2_0 p^0_1 - rest
            p[n + 1] = Q::zero();
            let jv = s.moment[0].eval_scalar(&p);
            p[n + 1] = -jv / &p[0];
            p
        },
    })
}

fn resonance() -> Result<Example> {
    let t = GeneratorTable::base(8);
    let w = vec![1, 1, -1, -1];
    let j = weighted_norm(&t, &w, qf(1, 2));
    let setup = Setup::new("resonance", Poisson::canonical(4), Lie::abelian(1), vec![j])?.with_torus_weights(vec![w.clone()])?;
    Ok(Example {
        key: "resonance",
        title: "(1,1,-1,-1)-resonance on C^4",
        params: Params::default(),
        setup,
        cone_weights: Some(vec![w]),
        expected: Expected {
            nonpositivity: Some(true),
            generating: Some(true),
            complete_intersection: Some(true),
            regular_stratum: Some(true),
        },
        sampler: |_, _, rng| {
            // (z3, z4) = u (z2, z1) with |u| = 1
            let z: Vec<Q> = (0..4).map(|_| small_rational(rng)).collect();
            let (c, s) = unit(rng);
            let rot = |re: &Q, im: &Q| (re * &c - im * &s, re * &s + im * &c);
            let (x3, y3) = rot(&z[1], &z[3]);
            let (x4, y4) = rot(&z[0], &z[2]);
            vec![z[0].clone(), z[1].clone(), x3, x4, z[2].clone(), z[3].clone(), y3, y4]
        },
    })
}

fn torus_t2(alpha: i64, beta: i64) -> Result<Example> {
    let t = GeneratorTable::base(8);
    let w1 = vec![alpha, 0, 1, 0];
    let w2 = vec![beta, -1, 0, 1];
    let j1 = weighted_norm(&t, &w1, qf(-1, 2));
    let j2 = weighted_norm(&t, &w2, qf(-1, 2));
    let setup = Setup::new("torus-t2", Poisson::canonical(4), Lie::abelian(2), vec![j1, j2])?
        .with_torus_weights(vec![w1.clone(), w2.clone()])?;
    Ok(Example {
        key: "torus-t2",
        title: "T^2 action on C^4 with parameters alpha, beta",
        params: Params { alpha, beta, ..Default::default() },
        setup,
        cone_weights: Some(vec![w1, w2]),
        expected: Expected {
            nonpositivity: Some(alpha < 0),
            generating: Some(alpha < 0),
            complete_intersection: if alpha < 0 { Some(true) } else { None },
            regular_stratum: None,
        },
        sampler: |_, _, rng| {
            // z1 = z3 = 0, |z4| = |z2|
            let (a, b) = (small_rational(rng), small_rational(rng));
            let (c, s) = unit(rng);
            let (x4, y4) = (&a * &c - &b * &s, &a * &s + &b * &c);
            vec![Q::zero(), a, Q::zero(), x4, Q::zero(), b, Q::zero(), y4]
        },
    })
}

/// Index of `(i, j)`, `i <= j`, among the upper-triangular entries.
fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    (0..i).map(|r| n - r).sum::<usize>() + (j - i)
}

fn commuting_variety(n: usize) -> Result<Example> {
    if n < 2 {
        return Err(Error::Argument("commuting variety needs n >= 2".into()));
    }
    let d = n * (n + 1) / 2;
    let t = GeneratorTable::base(2 * d);
    // Q_ij = q_ij; the momentum conjugate to an off-diagonal q_ij is
    // 2 P_ij under the trace pairing.
    let qm = |i: usize, j: usize| var(&t, sym_index(n, i, j));
    let pm = |i: usize, j: usize| {
        let v = var(&t, d + sym_index(n, i, j));
        if i == j {
            v
        } else {
            v.scale(&qf(1, 2))
        }
    };
    let mut moment = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut j = GradedElement::zero(&t);
            for k in 0..n {
                j = &j + &(&(&qm(a, k) * &pm(k, b)) - &(&pm(a, k) * &qm(k, b)));
            }
            // pairing with E_ab doubles the entry of the commutator
            moment.push(j.scale(&q(2)));
        }
    }
    let setup = oriented("commuting-variety", Poisson::canonical(d), so_n(n), moment)?;
    Ok(Example {
        key: "commuting-variety",
        title: "Commuting variety of symmetric n x n matrices",
        params: Params { n, ..Default::default() },
        setup,
        cone_weights: None,
        expected: Expected {
            nonpositivity: None,
            generating: Some(true),
            complete_intersection: Some(true),
            regular_stratum: Some(true),
        },
        sampler: |s, p, rng| {
            // Diagonal pair with distinct eigenvalues.
            let n = p.n;
            let d = s.base_dim() / 2;
            let mut v = vec![Q::zero(); 2 * d];
            for i in 0..n {
                v[sym_index(n, i, i)] = q(i as i64 + 1) + small_rational(rng) / q(10 * n as i64);
                v[d + sym_index(n, i, i)] = small_rational(rng);
            }
            v
        },
    })
}

fn linear_poisson() -> Result<Example> {
    // h = Heisenberg on the basis (e1, e3, e2), so [e1, e2] = e3 reads
    // f^2_{13} = 1; g = span(e1, e3) is abelian and J = (x1, x2).
    let mut f = vec![Q::zero(); 27];
    f[(0 * 3 + 2) * 3 + 1] = q(1);
    f[(2 * 3 + 0) * 3 + 1] = q(-1);
    let h = Lie::new(3, f)?;
    let t = GeneratorTable::base(3);
    let setup = Setup::new("linear-poisson", Poisson::linear(&h), Lie::abelian(2), vec![var(&t, 0), var(&t, 1)])?;
    Ok(Example {
        key: "linear-poisson",
        title: "Linear Poisson structure on the Heisenberg dual, restricted to span(e1, e3)",
        params: Params::default(),
        setup,
        cone_weights: None,
        expected: Expected {
            nonpositivity: None,
            generating: Some(true),
            complete_intersection: Some(true),
            regular_stratum: Some(true),
        },
        sampler: |_, _, rng| vec![Q::zero(), Q::zero(), small_rational(rng)],
    })
}

/// Catalog entry by key.
pub fn example(key: &str, params: &Params) -> Result<Example> {
    match key {
        "harmonic-oscillator" => harmonic_oscillator(),
        "free-particle" => free_particle(),
        "standard-example" => standard_default(),
        "angular-momentum" => angular_momentum(params.n),
        "planar-particles" => planar_particles(params.m),
        "resonance" => resonance(),
        "torus-t2" => torus_t2(params.alpha, params.beta),
        "commuting-variety" => commuting_variety(params.n.min(4).max(2)),
        "linear-poisson" => linear_poisson(),
        other => Err(Error::Argument(format!("unknown example '{other}'"))),
    }
}

/// Every entry with default parameters (commuting variety at `n = 2`).
pub fn catalog() -> Vec<Example> {
    KEYS.iter()
        .map(|k| {
            let p = if *k == "commuting-variety" { Params { n: 2, ..Default::default() } } else { Params::default() };
            example(k, &p).expect("catalog entries build")
        })
        .collect()
}

/// Nonpositivity verdict: the cone test when torus weights are known,
/// otherwise the sign test for quadratic moment maps.
pub fn nonpositivity(ex: &Example) -> Option<bool> {
    match &ex.cone_weights {
        Some(w) => Some(cone_test(w).spans),
        None => quadratic_sign_test(&ex.setup).filter(|_| ex.setup.l() == 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;

    #[test]
    fn catalog_is_equivariant() {
        for ex in catalog() {
            assert!(equivariance_first_class(&ex.setup).holds, "{}", ex.key);
        }
        for n in 2..=4 {
            assert!(equivariance_first_class(&angular_momentum(n).unwrap().setup).holds);
        }
        assert!(equivariance_first_class(&commuting_variety(3).unwrap().setup).holds);
    }

    #[test]
    fn perturbed_moment_detected() {
        let ex = angular_momentum(3).unwrap();
        let mut m = ex.setup.moment.clone();
        m[0] = &m[0] + &GradedElement::base_var(ex.setup.base_table(), 0);
        let s = Setup::new("bad", ex.setup.poisson.clone(), ex.setup.lie.clone(), m).unwrap();
        assert!(!equivariance_first_class(&s).holds);
    }

    #[test]
    fn cone_verdicts() {
        assert!(!cone_test(&[vec![1]]).spans);
        assert!(cone_test(&[vec![1, 1, -1, -1]]).spans);
        assert!(cone_test(&[vec![-1, 0, 1, 0], vec![1, -1, 0, 1]]).spans);
        assert!(!cone_test(&[vec![1, 0, 1, 0], vec![1, -1, 0, 1]]).spans);
        assert!(!cone_test(&[vec![0, 0, 1, 0], vec![1, -1, 0, 1]]).spans);
    }

    #[test]
    fn sign_test_agrees_with_cone() {
        for key in ["harmonic-oscillator", "resonance", "standard-example", "planar-particles"] {
            let ex = example(key, &Params::default()).unwrap();
            assert_eq!(quadratic_sign_test(&ex.setup), Some(cone_test(ex.cone_weights.as_ref().unwrap()).spans), "{key}");
        }
        assert_eq!(quadratic_sign_test(&free_particle().unwrap().setup), Some(false));
    }

    #[test]
    fn catalog_verdicts() {
        for ex in catalog() {
            if let Some(want) = ex.expected.nonpositivity {
                assert_eq!(nonpositivity(&ex), Some(want), "{}", ex.key);
            }
        }
        let neg = torus_t2(-2, 3).unwrap();
        let pos = torus_t2(1, 3).unwrap();
        assert_eq!(nonpositivity(&neg), Some(true));
        assert_eq!(nonpositivity(&pos), Some(false));
    }

    #[test]
    fn samplers_land_on_the_fibre() {
        let mut r = rng(7);
        for ex in catalog() {
            let pts = ex.sample(&mut r, 5);
            assert!(rank_probe(&ex.setup, &pts).is_ok(), "{}", ex.key);
        }
    }

    #[test]
    fn rank_probes() {
        let mut r = rng(11);
        let am = angular_momentum(3).unwrap();
        let t = rank_probe(&am.setup, &am.sample(&mut r, 20)).unwrap();
        assert!(t.rows.iter().all(|row| row.rank < 3));
        assert!(!t.full_rank_attained);
        let cv = commuting_variety(2).unwrap();
        let t = rank_probe(&cv.setup, &cv.sample(&mut r, 3)).unwrap();
        assert!(t.full_rank_attained);
        let rs = resonance().unwrap();
        let t = rank_probe(&rs.setup, &rs.sample(&mut r, 10)).unwrap();
        assert!(t.rows.iter().all(|row| row.point.iter().all(Zero::is_zero) || row.rank == 1));
        let mut bad = vec![q(0); 8];
        bad[0] = q(1);
        assert!(rank_probe(&rs.setup, &[bad]).is_err());
    }

    #[test]
    fn fm_basics() {
        // x <= 1, -x <= -2 infeasible
        assert!(!fourier_motzkin(vec![(vec![q(1)], q(1)), (vec![q(-1)], q(-2))], 1));
        assert!(fourier_motzkin(vec![(vec![q(1), q(1)], q(1)), (vec![q(-1), q(0)], q(0))], 2));
    }
}
