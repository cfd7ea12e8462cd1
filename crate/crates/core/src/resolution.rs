//! Construction of the three free complexes attached to a graph: the
//! monomial resolution of the parking-function ideal, the binomial
//! resolution of the toppling ideal, and the homogenized one-parameter
//! family connecting them.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{Divisor, Multigraph};
use crate::linalg::smith_normal_form;
use crate::partition::{n_acyclic_partitions, AcyclicPartition, ChipClass};
use crate::poly::{big, Monomial, PolyMatrix, Polynomial};

/// Which ideal a complex resolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealKind {
    /// The monomial parking-function ideal M_G.
    Parking,
    /// The toppling (Laplacian lattice) ideal I_G.
    Toppling,
    /// The homogenization of the toppling resolution by a weight vector.
    Homogenized,
}

impl IdealKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            IdealKind::Parking => "mg",
            IdealKind::Toppling => "ig",
            IdealKind::Homogenized => "t",
        }
    }
}

/// One free-module generator: a chip-firing class represented by its
/// sink-rooted orientation.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub rep: AcyclicPartition,
    /// The divisor of the sink-rooted representative.
    pub divisor: Divisor,
    /// Grading label: equal to `divisor` for the parking ideal, and the
    /// q-reduced form of it (a canonical divisor-class representative)
    /// for the toppling family.
    pub multidegree: Divisor,
    /// The weight `lambda . divisor`; zero unless homogenized.
    pub weight: i64,
}

/// An integral weight vector realizing the degeneration: `laplacian * lambda
/// = y` with every `lambda_i >= 1` and `y_i > 0` off the sink.
#[derive(Debug, Clone)]
pub struct WeightVector {
    pub lambda: Vec<i64>,
    pub y: Vec<i64>,
    pub t_weight: u32,
}

impl WeightVector {
    /// Validates a user-supplied lambda against the host graph.
    pub fn from_lambda(g: &Multigraph, lambda: Vec<i64>, t_weight: u32) -> Result<Self> {
        if lambda.len() != g.n() {
            return Err(Error::InvalidWeightVector(format!(
                "expected {} entries, got {}",
                g.n(),
                lambda.len()
            )));
        }
        if t_weight == 0 {
            return Err(Error::InvalidWeightVector(
                "t-weight must be positive".into(),
            ));
        }
        if lambda.iter().any(|&x| x < 1) {
            return Err(Error::InvalidWeightVector(
                "every lambda entry must be at least 1".into(),
            ));
        }
        let lap = g.laplacian();
        let y: Vec<i64> = (0..g.n())
            .map(|i| (0..g.n()).map(|j| lap[i][j] * lambda[j]).sum())
            .collect();
        if y[..g.n() - 1].iter().any(|&v| v <= 0) {
            return Err(Error::InvalidWeightVector(
                "laplacian * lambda must be positive off the sink".into(),
            ));
        }
        Ok(WeightVector {
            lambda,
            y,
            t_weight,
        })
    }

    /// Rescales so every homogenization gap becomes a multiple of the
    /// requested t-weight: `lambda -> w*(lambda - 1) + 1` multiplies the
    /// image vector by w (the all-ones shift is in the kernel), leaving
    /// the resulting t-exponents unchanged.
    pub fn scaled_to_t_weight(&self, g: &Multigraph, t_weight: u32) -> Result<Self> {
        let w = t_weight as i64;
        let lambda: Vec<i64> = self.lambda.iter().map(|&l| w * (l - 1) + 1).collect();
        Self::from_lambda(g, lambda, t_weight)
    }
}

/// Deterministic weight vector: take the least positive multiple `m` of
/// `(1,...,1,-(n-1))` lying in the integer image of the Laplacian, solve for
/// an integer preimage, and shift by the all-ones kernel vector until every
/// entry is at least 1.
pub fn weight_vector(g: &Multigraph) -> Result<WeightVector> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooSmallForWeights);
    }
    let lap = g.laplacian();
    let snf = smith_normal_form(&lap);
    let y0: Vec<BigInt> = (0..n)
        .map(|i| {
            if i + 1 == n {
                BigInt::from(-((n as i64) - 1))
            } else {
                BigInt::from(1)
            }
        })
        .collect();
    // z = U * y0; the system S w = m z must be integrally solvable
    let z: Vec<BigInt> = (0..n)
        .map(|i| (0..n).map(|j| &snf.u[i][j] * &y0[j]).sum())
        .collect();
    let mut m = BigInt::from(1);
    for i in 0..n {
        let d = &snf.s[i][i];
        if d.is_zero() {
            if !z[i].is_zero() {
                return Err(Error::InvalidWeightVector(
                    "target vector is not in the rational image of the Laplacian".into(),
                ));
            }
            continue;
        }
        let g_ = num_integer::Integer::gcd(d, &z[i]);
        let need = d / g_;
        m = num_integer::Integer::lcm(&m, &need);
    }
    let w: Vec<BigInt> = (0..n)
        .map(|i| {
            if snf.s[i][i].is_zero() {
                BigInt::zero()
            } else {
                &m * &z[i] / &snf.s[i][i]
            }
        })
        .collect();
    let x: Vec<BigInt> = (0..n)
        .map(|i| (0..n).map(|j| &snf.v[i][j] * &w[j]).sum())
        .collect();
    let min = x.iter().min().cloned().unwrap();
    let shift = BigInt::from(1) - min;
    let lambda: Vec<i64> = x
        .iter()
        .map(|v| {
            let l = v + &shift;
            i64::try_from(&l)
                .map_err(|_| Error::InvalidWeightVector("weight vector exceeds i64 range".into()))
        })
        .collect::<Result<_>>()?;
    let mi = i64::try_from(&m)
        .map_err(|_| Error::InvalidWeightVector("multiplier exceeds i64 range".into()))?;
    let y: Vec<i64> = (0..n)
        .map(|i| if i + 1 == n { -mi * (n as i64 - 1) } else { mi })
        .collect();
    let wv = WeightVector {
        lambda,
        y,
        t_weight: 1,
    };
    // paranoia: the SNF route must produce a genuine solution
    let check = WeightVector::from_lambda(g, wv.lambda.clone(), 1)?;
    if check.y != wv.y {
        return Err(Error::InvalidWeightVector(
            "solver produced an inconsistent weight vector".into(),
        ));
    }
    Ok(wv)
}

/// A free complex with one module per homological degree `0..n-1` and the
/// differentials between consecutive degrees.
#[derive(Debug, Clone)]
pub struct FreeComplex {
    kind: IdealKind,
    n: usize,
    t_weight: u32,
    lambda: Option<Vec<i64>>,
    bases: Vec<Vec<BasisElement>>,
    /// `diffs[k-1]` maps homological degree k to k-1.
    diffs: Vec<PolyMatrix>,
}

impl FreeComplex {
    pub fn kind(&self) -> IdealKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_weight(&self) -> u32 {
        self.t_weight
    }

    pub fn lambda(&self) -> Option<&[i64]> {
        self.lambda.as_deref()
    }

    pub fn length(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, k: usize) -> &[BasisElement] {
        &self.bases[k]
    }

    pub fn bases(&self) -> &[Vec<BasisElement>] {
        &self.bases
    }

    pub fn rank(&self, k: usize) -> usize {
        self.bases[k].len()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.len()).collect()
    }

    /// The differential from degree `k` to `k-1` (1-indexed by source).
    pub fn differential(&self, k: usize) -> &PolyMatrix {
        &self.diffs[k - 1]
    }

    pub fn differentials(&self) -> &[PolyMatrix] {
        &self.diffs
    }

    pub(crate) fn from_parts(
        kind: IdealKind,
        n: usize,
        t_weight: u32,
        lambda: Option<Vec<i64>>,
        bases: Vec<Vec<BasisElement>>,
        diffs: Vec<PolyMatrix>,
    ) -> Self {
        FreeComplex {
            kind,
            n,
            t_weight,
            lambda,
            bases,
            diffs,
        }
    }
}

/// Betti numbers by the partition count: entry k is the number of
/// sink-rooted acyclic (k+1)-partitions.
pub fn betti(g: &Multigraph) -> Vec<usize> {
    (1..=g.n())
        .map(|k| n_acyclic_partitions(g, k).map(|v| v.len()).unwrap_or(0))
        .collect()
}

/// The minimal monomial generators of the parking-function ideal: the
/// divisor monomials of the sink-rooted 2-partitions, in basis order.
pub fn minimal_generators(g: &Multigraph) -> Vec<Monomial> {
    if g.n() < 2 {
        return Vec::new();
    }
    n_acyclic_partitions(g, 2)
        .expect("k=2 is valid for n >= 2")
        .iter()
        .map(|c| Monomial::from_divisor(&c.divisor(g)).expect("divisors are nonnegative"))
        .collect()
}

/// Independent generator computation straight from the definition: one
/// monomial per nonempty subset of non-sink vertices, then divisibility
/// minimalization. Quadratic and only fit for small graphs; used as an
/// oracle against `minimal_generators`.
pub fn bruteforce_parking_generators(g: &Multigraph) -> Vec<Monomial> {
    let n = g.n();
    if n < 2 {
        return Vec::new();
    }
    let mut monomials: Vec<Monomial> = Vec::new();
    for mask in 1u64..(1 << (n - 1)) {
        let mut exps = vec![0u32; n];
        for u in 0..(n - 1) {
            if mask & (1 << u) == 0 {
                continue;
            }
            // the sink vertex is never in the subset, so its bit is unset
            for v in 0..n {
                if mask & (1 << v) == 0 {
                    exps[u] += g.weight(u, v) as u32;
                }
            }
        }
        monomials.push(Monomial { exps, t_exp: 0 });
    }
    monomials.sort();
    monomials.dedup();
    let minimal: Vec<Monomial> = monomials
        .iter()
        .filter(|m| {
            !monomials
                .iter()
                .any(|other| other != *m && other.divides(m))
        })
        .cloned()
        .collect();
    minimal
}

/// Shared construction for all three complexes.
struct Builder<'a> {
    g: &'a Multigraph,
    bases: Vec<Vec<BasisElement>>,
    index: Vec<HashMap<AcyclicPartition, usize>>,
}

impl<'a> Builder<'a> {
    fn new(g: &'a Multigraph, kind: IdealKind, lambda: Option<&[i64]>) -> Result<Self> {
        let n = g.n();
        let mut bases = Vec::with_capacity(n);
        let mut index = Vec::with_capacity(n);
        for k in 1..=n {
            let reps = n_acyclic_partitions(g, k)?;
            let mut level = Vec::with_capacity(reps.len());
            let mut map = HashMap::with_capacity(reps.len());
            for (i, rep) in reps.into_iter().enumerate() {
                let divisor = rep.divisor(g);
                let multidegree = match kind {
                    IdealKind::Parking => divisor.clone(),
                    _ => g.q_reduce(&divisor),
                };
                let weight = match lambda {
                    Some(l) => dot(l, &divisor.values),
                    None => 0,
                };
                map.insert(rep.clone(), i);
                level.push(BasisElement {
                    rep,
                    divisor,
                    multidegree,
                    weight,
                });
            }
            bases.push(level);
            index.push(map);
        }
        Ok(Builder { g, bases, index })
    }

    /// Column terms for one source basis element: `(target row, sign, exps)`.
    fn column_terms(
        &self,
        kind: IdealKind,
        k: usize,
        b: &BasisElement,
    ) -> Vec<(usize, i64, Vec<u32>)> {
        let sink = self.g.sink();
        let cls = ChipClass::from_canonical(b.rep.clone());
        let mut out = Vec::new();
        match kind {
            IdealKind::Parking => {
                for e in b.rep.contractible_edges() {
                    let target = b.rep.contract(e).expect("edge is contractible");
                    let row = self.index[k - 1][&target];
                    out.push((row, cls.sign(e), b.rep.contraction_exponents(self.g, e)));
                }
            }
            IdealKind::Toppling | IdealKind::Homogenized => {
                for (e, member) in cls.contractible_edges() {
                    let contracted = member.contract(e).expect("edge is contractible");
                    let target = contracted.canonical_rep(sink);
                    let row = self.index[k - 1][&target];
                    out.push((row, cls.sign(e), member.contraction_exponents(self.g, e)));
                }
            }
        }
        out
    }

    fn build(self, kind: IdealKind, weight: Option<&WeightVector>) -> Result<FreeComplex> {
        let n = self.g.n();
        let mut diffs = Vec::with_capacity(n.saturating_sub(1));
        for k in 1..n {
            let rows = self.bases[k - 1].len();
            let cols = self.bases[k].len();
            let mut m = PolyMatrix::zero(rows, cols);
            for (col, b) in self.bases[k].iter().enumerate() {
                for (row, sign, exps) in self.column_terms(kind, k, b) {
                    let t_exp = match (kind, weight) {
                        (IdealKind::Homogenized, Some(w)) => {
                            let target = &self.bases[k - 1][row];
                            let gap = b.weight - dot_u32(&w.lambda, &exps) - target.weight;
                            if gap < 0 {
                                return Err(Error::InvalidWeightVector(format!(
                                    "negative homogenization gap {gap}"
                                )));
                            }
                            if gap % w.t_weight as i64 != 0 {
                                return Err(Error::GapNotDivisible(gap, w.t_weight));
                            }
                            (gap / w.t_weight as i64) as u32
                        }
                        _ => 0,
                    };
                    let mono = Monomial { exps, t_exp };
                    m.add_to(row, col, &Polynomial::from_term(mono, big(sign)));
                }
            }
            diffs.push(m);
        }
        let mut complex = FreeComplex::from_parts(
            kind,
            n,
            weight.map(|w| w.t_weight).unwrap_or(1),
            weight.map(|w| w.lambda.clone()),
            self.bases,
            diffs,
        );
        normalize_generator_signs(&mut complex);
        Ok(complex)
    }
}

/// Flips degree-1 basis elements so every first-differential entry has a
/// positive coefficient on its representative monomial; the flip negates
/// the matching column of the first differential and row of the second,
/// which is an isomorphism of complexes.
fn normalize_generator_signs(c: &mut FreeComplex) {
    if c.length() < 2 || c.diffs.is_empty() {
        return;
    }
    let d1 = &c.diffs[0];
    let mut flips = Vec::new();
    for col in 0..d1.cols {
        let Some(p) = d1.get(0, col) else { continue };
        // coefficient of the representative-divisor monomial
        let rep_mono =
            Monomial::from_divisor(&c.bases[1][col].divisor).expect("divisors are nonnegative");
        let coeff = p
            .terms()
            .find(|(m, _)| m.exps == rep_mono.exps)
            .map(|(_, coef)| coef.clone());
        if let Some(coef) = coeff {
            if coef.is_negative() {
                flips.push(col);
            }
        }
    }
    for col in flips {
        let p = c.diffs[0].get(0, col).unwrap().neg();
        c.diffs[0].set(0, col, p);
        if c.diffs.len() > 1 {
            let rows2 = c.diffs[1].rows;
            let cols2 = c.diffs[1].cols;
            debug_assert_eq!(rows2, c.bases[1].len());
            for j in 0..cols2 {
                if let Some(q) = c.diffs[1].get(col, j) {
                    let neg = q.neg();
                    c.diffs[1].set(col, j, neg);
                }
            }
        }
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_u32(a: &[i64], b: &[u32]) -> i64 {
    a.iter().zip(b).map(|(x, &y)| x * y as i64).sum()
}

/// Resolution of the parking-function ideal: every differential entry is a
/// single signed monomial.
pub fn build_parking(g: &Multigraph) -> Result<FreeComplex> {
    Builder::new(g, IdealKind::Parking, None)?.build(IdealKind::Parking, None)
}

/// Resolution of the toppling ideal: entries accumulate over all
/// contractible edges of each chip-firing class, giving binomials exactly
/// at bridges of quotient graphs.
pub fn build_toppling(g: &Multigraph) -> Result<FreeComplex> {
    Builder::new(g, IdealKind::Toppling, None)?.build(IdealKind::Toppling, None)
}

/// Homogenization of the toppling resolution by the weight vector: each
/// term picks up `t` to the power of its weight drop.
pub fn build_homogenized(g: &Multigraph, w: &WeightVector) -> Result<FreeComplex> {
    Builder::new(g, IdealKind::Homogenized, Some(&w.lambda))?.build(IdealKind::Homogenized, Some(w))
}

/// Dispatcher used by the CLI.
pub fn build_complex(
    g: &Multigraph,
    kind: IdealKind,
    weight: Option<&WeightVector>,
) -> Result<FreeComplex> {
    match kind {
        IdealKind::Parking => build_parking(g),
        IdealKind::Toppling => build_toppling(g),
        IdealKind::Homogenized => {
            let owned;
            let w = match weight {
                Some(w) => w,
                None => {
                    owned = weight_vector(g)?;
                    &owned
                }
            };
            build_homogenized(g, w)
        }
    }
}
