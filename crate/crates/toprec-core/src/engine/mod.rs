//! The recursion engine: given a family of local operators it computes the
//! coefficient tensors F_{g,n} level by level in increasing Euler
//! characteristic, along with free energies and numeric correlator values.
//!
//! Two independent computation paths are maintained. The classic path drives
//! the four-operator (A, B, C, D) recursion through tensor contractions; the
//! general path evaluates the full operator-family sum entry by entry. They
//! are cached separately so cross-checking one against the other is meaningful.

mod cache;

pub use cache::{clear_cache, list_cache, verify_cache, CacheEntry, Manifest};

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{special, Scalar};
use crate::tensor::{contract, Index, IndexList, LabeledTensor, RecursionOperator, TensorBuilder};
use crate::{Error, Result};

/// Identity of a structure: used for the cache digest and the manifest.
#[derive(Clone, Debug)]
pub struct StructureMeta {
    pub family: String,
    pub params: BTreeMap<String, String>,
    pub scalar_kind: String,
}

/// How the three-point operator relates to F_{0,3}.
///
/// `ThreePointDirect`: the stored operator tensor *is* F_{0,3} (the convention
/// for the curve families with symmetrized operators). `ThreePointOrdered`:
/// F_{0,3} is the sum of the operator over the two ordered choices of its last
/// two slots, i.e. twice the operator when it is symmetric there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    ThreePointDirect,
    ThreePointOrdered,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::ThreePointDirect => "three-point-direct",
            Normalization::ThreePointOrdered => "three-point-ordered",
        }
    }
}

/// Which recursion drives the computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecursionPath {
    /// The four-operator recursion assembled via tensor contractions.
    Abcd,
    /// The full operator-family recursion evaluated entry by entry.
    General,
}

type SupportFn = dyn Fn(u32, u32) -> Vec<Index> + Send + Sync;
type BasisEvalFn = dyn Fn(&Index, &[Scalar]) -> Result<Scalar> + Send + Sync;
type PairingFn = dyn Fn(&Index) -> Result<Scalar> + Send + Sync;

/// A quantum Airy structure: operators plus the data needed to enumerate,
/// evaluate, and pair the coefficient tensors.
pub struct AiryStructure {
    meta: StructureMeta,
    normalization: Normalization,
    operators: BTreeMap<(usize, usize, u32), RecursionOperator>,
    /// Sound per-slot index support for F_{g,n}; must grow with 2g-2+n.
    slot_support: Box<SupportFn>,
    basis_eval: Option<Box<BasisEvalFn>>,
    pairing: Option<Box<PairingFn>>,
    tables: RwLock<HashMap<(RecursionPath, u32, u32), LabeledTensor>>,
    tuple_cap: u64,
    disk: Option<PathBuf>,
}

fn slot_labels(n: u32) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// All distinct permutations of a sorted tuple, lexicographically.
fn distinct_permutations(sorted: &[Index]) -> Vec<IndexList> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        // Standard next-permutation.
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Sorted n-tuples (multisets) over the support list.
fn sorted_tuples(support: &[Index], n: usize) -> Vec<IndexList> {
    let mut sorted_support = support.to_vec();
    sorted_support.sort();
    sorted_support.dedup();
    let mut out: Vec<IndexList> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &out {
            let start = t
                .last()
                .map(|last| sorted_support.iter().position(|s| s >= last).unwrap_or(sorted_support.len()))
                .unwrap_or(0);
            for s in &sorted_support[start..] {
                let mut u = t.clone();
                u.push(s.clone());
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Ordered u-tuples of distinct elements drawn from `items`.
fn ordered_distinct<T: Clone>(items: &[T], u: usize) -> Vec<Vec<T>> {
    if u == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<T>)> = vec![(Vec::new(), Vec::new())];
    while let Some((used, tuple)) = stack.pop() {
        if tuple.len() == u {
            out.push(tuple);
            continue;
        }
        for (i, it) in items.iter().enumerate() {
            if used.contains(&i) {
                continue;
            }
            let mut used2 = used.clone();
            used2.push(i);
            let mut t2 = tuple.clone();
            t2.push(it.clone());
            stack.push((used2, t2));
        }
    }
    out
}

/// Ordered compositions of `total` into `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Ordered compositions of `total` into `parts` nonnegative summands.
fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in weak_compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl AiryStructure {
    pub fn new(
        meta: StructureMeta,
        normalization: Normalization,
        operators: Vec<RecursionOperator>,
        slot_support: Box<SupportFn>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for op in operators {
            let key = (op.n, op.m, op.h);
            if map.insert(key, op).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate operator signature {key:?}"
                )));
            }
        }
        Ok(Self {
            meta,
            normalization,
            operators: map,
            slot_support,
            basis_eval: None,
            pairing: None,
            tables: RwLock::new(HashMap::new()),
            tuple_cap: 1_000_000,
            disk: None,
        })
    }

    pub fn with_basis_eval(mut self, f: Box<BasisEvalFn>) -> Self {
        self.basis_eval = Some(f);
        self
    }

    pub fn with_pairing(mut self, f: Box<PairingFn>) -> Self {
        self.pairing = Some(f);
        self
    }

    pub fn with_tuple_cap(mut self, cap: u64) -> Self {
        self.tuple_cap = cap;
        self
    }

    pub fn with_disk_cache(mut self, dir: PathBuf) -> Self {
        self.disk = Some(dir);
        self
    }

    pub fn meta(&self) -> &StructureMeta {
        &self.meta
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Hex digest identifying this structure (family, parameters, scalar kind,
    /// normalization) for the on-disk cache layout.
    pub fn digest(&self) -> String {
        cache::digest(&self.meta, self.normalization)
    }

    /// The path used for CLI computation and disk persistence: the classic
    /// four-operator path when the operator set is exactly {A, B, C, D},
    /// otherwise the general path.
    pub fn default_path(&self) -> RecursionPath {
        if self.has_exact_abcd() {
            RecursionPath::Abcd
        } else {
            RecursionPath::General
        }
    }

    fn has_exact_abcd(&self) -> bool {
        let keys: Vec<_> = self.operators.keys().copied().collect();
        let mut expected = vec![(3, 0, 0), (2, 1, 0), (1, 2, 0), (1, 0, 1)];
        expected.sort_unstable();
        keys == expected
    }

    fn op(&self, n: usize, m: usize, h: u32) -> Result<&RecursionOperator> {
        self.operators
            .get(&(n, m, h))
            .ok_or(Error::MissingOperator(n, m, h as usize))
    }

    pub fn slot_support(&self, g: u32, n: u32) -> Vec<Index> {
        (self.slot_support)(g, n)
    }

    fn check_stable(g: u32, n: u32) -> Result<()> {
        if n == 0 || 2 * g + n <= 2 {
            Err(Error::Unstable(g, n))
        } else {
            Ok(())
        }
    }

    /// The coefficient tensor F_{g,n}, labels x1..xn, fully symmetric with all
    /// index orderings stored.
    pub fn f(&self, g: u32, n: u32, path: RecursionPath) -> Result<LabeledTensor> {
        Self::check_stable(g, n)?;
        if let Some(t) = self.tables.read().expect("table lock").get(&(path, g, n)) {
            return Ok(t.clone());
        }
        if path == self.default_path() {
            if let Some(dir) = &self.disk {
                if let Some(t) = cache::load_level(dir, &self.digest(), g, n)? {
                    self.tables
                        .write()
                        .expect("table lock")
                        .insert((path, g, n), t.clone());
                    return Ok(t);
                }
            }
        }
        let t = match path {
            RecursionPath::Abcd => self.compute_abcd(g, n)?,
            RecursionPath::General => self.compute_general(g, n)?,
        };
        if path == self.default_path() {
            if let Some(dir) = &self.disk {
                cache::save_level(dir, &self.meta, self.normalization, g, n, &t)?;
            }
        }
        self.tables
            .write()
            .expect("table lock")
            .insert((path, g, n), t.clone());
        Ok(t)
    }

    fn cap_check(&self, g: u32, n: u32, count: u64) -> Result<()> {
        if count > self.tuple_cap {
            Err(Error::CapExceeded(g, n, count))
        } else {
            Ok(())
        }
    }

    // ------------------------------------------------------------------
    // Classic path: contraction-driven assembly.
    // ------------------------------------------------------------------

    fn compute_abcd(&self, g: u32, n: u32) -> Result<LabeledTensor> {
        // Refuse to run when extra operators exist: the four-operator path
        // would silently ignore them.
        for key in self.operators.keys() {
            if ![(3, 0, 0), (2, 1, 0), (1, 2, 0), (1, 0, 1)].contains(key) {
                return Err(Error::InvalidArgument(format!(
                    "operator family has signature {key:?}; the four-operator path only \
                     supports {{A, B, C, D}}"
                )));
            }
        }
        let labels = slot_labels(n);
        if (g, n) == (0, 3) {
            let a = self.op(3, 0, 0)?.with_labels(labels, vec![])?.to_tensor()?;
            return match self.normalization {
                Normalization::ThreePointDirect => Ok(a),
                Normalization::ThreePointOrdered => a.scale(&Scalar::from_i64(2)),
            };
        }
        if (g, n) == (1, 1) {
            return self.op(1, 0, 1)?.with_labels(labels, vec![])?.to_tensor()?.add(
                &LabeledTensor::zero(slot_labels(1))?,
            );
        }

        let mut acc = LabeledTensor::zero(labels.clone())?;
        let two = Scalar::from_i64(2);

        // 2 sum_i B[x1, xi | b] F_{g,n-1}[b, rest].
        if n >= 2 {
            let prev = self.f(g, n - 1, RecursionPath::Abcd)?;
            for i in 2..=n {
                let rest: Vec<String> = (2..=n).filter(|&j| j != i).map(|j| format!("x{j}")).collect();
                let mut prev_labels = vec!["b1".to_string()];
                prev_labels.extend(rest.clone());
                let fp = prev.relabel(prev_labels)?;
                let b = self.op(2, 1, 0)?.with_labels(
                    vec!["x1".into(), format!("x{i}")],
                    vec!["b1".into()],
                )?;
                let term = contract(&b, &fp, &["b1"])?;
                acc = acc.add(&term.scale(&two)?)?;
                self.cap_check(g, n, acc.len() as u64)?;
            }
        }

        let c = self.op(1, 2, 0)?.with_labels(
            vec!["x1".into()],
            vec!["b1".into(), "b2".into()],
        )?;

        // sum_{b,b'} C[x1 | b, b'] F_{g-1,n+1}[b, b', rest].
        if g >= 1 {
            let lower = self.f(g - 1, n + 1, RecursionPath::Abcd);
            match lower {
                Ok(fm) => {
                    let mut lbls = vec!["b1".to_string(), "b2".to_string()];
                    lbls.extend((2..=n).map(|j| format!("x{j}")));
                    let fm = fm.relabel(lbls)?;
                    let term = contract(&c, &fm, &["b1", "b2"])?;
                    acc = acc.add(&term)?;
                    self.cap_check(g, n, acc.len() as u64)?;
                }
                Err(Error::Unstable(_, _)) => {}
                Err(e) => return Err(e),
            }
        }

        // Ordered stable splits: C[x1 | b, b'] F_{g1}[b, I1] F_{g2}[b', I2].
        let rest_slots: Vec<u32> = (2..=n).collect();
        for mask in 0..(1u64 << rest_slots.len()) {
            let (mut i1, mut i2) = (Vec::new(), Vec::new());
            for (bit, &slot) in rest_slots.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    i1.push(slot);
                } else {
                    i2.push(slot);
                }
            }
            for g1 in 0..=g {
                let g2 = g - g1;
                let (n1, n2) = (1 + i1.len() as u32, 1 + i2.len() as u32);
                if Self::check_stable(g1, n1).is_err() || Self::check_stable(g2, n2).is_err() {
                    continue;
                }
                let f1 = self.f(g1, n1, RecursionPath::Abcd)?;
                let f2 = self.f(g2, n2, RecursionPath::Abcd)?;
                let mut l1 = vec!["b1".to_string()];
                l1.extend(i1.iter().map(|j| format!("x{j}")));
                let mut l2 = vec!["b2".to_string()];
                l2.extend(i2.iter().map(|j| format!("x{j}")));
                let prod = f1.relabel(l1)?.tensor_product(&f2.relabel(l2)?)?;
                self.cap_check(g, n, prod.len() as u64)?;
                let term = contract(&c, &prod, &["b1", "b2"])?;
                acc = acc.add(&term)?;
                self.cap_check(g, n, acc.len() as u64)?;
            }
        }
        Ok(acc)
    }

    // ------------------------------------------------------------------
    // General path: entry-wise evaluation of the operator-family sum.
    // ------------------------------------------------------------------

    fn compute_general(&self, g: u32, n: u32) -> Result<LabeledTensor> {
        let support = self.slot_support(g, n);
        let sorted = sorted_tuples(&support, n as usize);
        self.cap_check(g, n, sorted.len() as u64)?;
        let mut builder = TensorBuilder::new(slot_labels(n))?;
        let mut written: u64 = 0;
        for tuple in sorted {
            let v = self.value_general(g, n, &tuple)?;
            if v.is_zero() {
                continue;
            }
            for perm in distinct_permutations(&tuple) {
                written += 1;
                self.cap_check(g, n, written)?;
                builder.accumulate(perm, v.clone())?;
            }
        }
        Ok(builder.freeze())
    }

    /// F_{g,n} at one index tuple via the general recursion, distinguishing
    /// the first slot of the tuple exactly as given.
    pub fn value_general(&self, g: u32, n: u32, tuple: &[Index]) -> Result<Scalar> {
        Self::check_stable(g, n)?;
        if tuple.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "tuple arity {} does not match n = {n}",
                tuple.len()
            )));
        }
        let mut total = Scalar::zero();
        let others: Vec<usize> = (1..n as usize).collect();
        for (&(np, mp, h), op) in &self.operators {
            if h > g || np < 1 || np > n as usize {
                continue;
            }
            let k_arity = np + mp + 2 * h as usize;
            let u = np - 1;
            for e in ordered_distinct(&others, u) {
                let mut in_tuple: IndexList = vec![tuple[0].clone()];
                in_tuple.extend(e.iter().map(|&p| tuple[p].clone()));
                let rest: Vec<usize> =
                    others.iter().copied().filter(|p| !e.contains(p)).collect();
                if mp == 0 {
                    if !rest.is_empty() || g != h {
                        continue;
                    }
                    let mut mult = multiplicity(k_arity, u, 0, h, &[]);
                    if (np, mp) == (1, 0) {
                        mult /= BigInt::from(2);
                    }
                    if (np, mp, h) == (3, 0, 0)
                        && self.normalization == Normalization::ThreePointDirect
                    {
                        mult /= BigInt::from(2);
                    }
                    let v = (op.value)(&in_tuple, &[]);
                    total = total.checked_add(&v.scale(&mult))?;
                    continue;
                }
                for s in 1..=mp {
                    let g_budget = g as i64 - h as i64 - (mp as i64 - s as i64);
                    if g_budget < 0 {
                        continue;
                    }
                    for q in compositions(mp, s) {
                        for assign_code in 0..(s as u64).pow(rest.len() as u32) {
                            let mut ext: Vec<Vec<usize>> = vec![Vec::new(); s];
                            let mut code = assign_code;
                            for &p in &rest {
                                ext[(code % s as u64) as usize].push(p);
                                code /= s as u64;
                            }
                            for gs in weak_compositions(g_budget as u32, s) {
                                let stable = (0..s).all(|i| {
                                    let ni = q[i] as u32 + ext[i].len() as u32;
                                    Self::check_stable(gs[i], ni).is_ok()
                                });
                                if !stable {
                                    continue;
                                }
                                let mult = multiplicity(k_arity, u, s, h, &q);
                                let term = self.beta_sum(op, &in_tuple, tuple, &q, &gs, &ext)?;
                                total = total.checked_add(&term.scale(&mult))?;
                            }
                        }
                    }
                }
            }
        }
        Ok(total)
    }

    /// sum over all ordered output tuples of op.value times the product of
    /// part tensors, chunked consecutively.
    fn beta_sum(
        &self,
        op: &RecursionOperator,
        in_tuple: &[Index],
        tuple: &[Index],
        q: &[usize],
        gs: &[u32],
        ext: &[Vec<usize>],
    ) -> Result<Scalar> {
        let s = q.len();
        // Per part: all (chunk, F-value) pairs with nonzero F.
        let mut part_terms: Vec<Vec<(IndexList, Scalar)>> = Vec::with_capacity(s);
        for i in 0..s {
            let ni = q[i] as u32 + ext[i].len() as u32;
            let fi = self.f(gs[i], ni, RecursionPath::General)?;
            let support = self.slot_support(gs[i], ni);
            let ext_indices: IndexList = ext[i].iter().map(|&p| tuple[p].clone()).collect();
            let mut terms = Vec::new();
            let mut chunks: Vec<IndexList> = vec![Vec::new()];
            for _ in 0..q[i] {
                let mut next = Vec::new();
                for c in &chunks {
                    for idx in &support {
                        let mut c2 = c.clone();
                        c2.push(idx.clone());
                        next.push(c2);
                    }
                }
                chunks = next;
            }
            for chunk in chunks {
                let mut key = chunk.clone();
                key.extend(ext_indices.iter().cloned());
                let v = fi.get(&key);
                if !v.is_zero() {
                    terms.push((chunk, v));
                }
            }
            if terms.is_empty() {
                return Ok(Scalar::zero());
            }
            part_terms.push(terms);
        }
        // Cartesian product over parts.
        let mut total = Scalar::zero();
        let mut stack: Vec<(usize, IndexList, Scalar)> = vec![(0, Vec::new(), Scalar::one())];
        while let Some((i, beta, fprod)) = stack.pop() {
            if i == s {
                let ov = (op.value)(in_tuple, &beta);
                if !ov.is_zero() {
                    total = total.checked_add(&ov.checked_mul(&fprod)?)?;
                }
                continue;
            }
            for (chunk, v) in &part_terms[i] {
                let mut b2 = beta.clone();
                b2.extend(chunk.iter().cloned());
                stack.push((i + 1, b2, fprod.checked_mul(v)?));
            }
        }
        Ok(total)
    }

    /// F_{g,n} at one tuple via the classic path, distinguishing the first
    /// slot exactly as given (used to verify symmetry non-vacuously).
    pub fn value_abcd(&self, g: u32, n: u32, tuple: &[Index]) -> Result<Scalar> {
        Self::check_stable(g, n)?;
        if (g, n) == (0, 3) {
            let a = self.op(3, 0, 0)?;
            let v = (a.value)(tuple, &[]);
            return Ok(match self.normalization {
                Normalization::ThreePointDirect => v,
                Normalization::ThreePointOrdered => v.scale(&BigRational::from(BigInt::from(2))),
            });
        }
        if (g, n) == (1, 1) {
            return Ok((self.op(1, 0, 1)?.value)(tuple, &[]));
        }
        let support = self.slot_support(g, n);
        let mut total = Scalar::zero();
        // B-terms.
        let b = self.op(2, 1, 0)?;
        let prev = self.f(g, n - 1, RecursionPath::Abcd)?;
        for i in 1..n as usize {
            let in_tuple = vec![tuple[0].clone(), tuple[i].clone()];
            let rest: IndexList = (1..n as usize)
                .filter(|&j| j != i)
                .map(|j| tuple[j].clone())
                .collect();
            for beta in &support {
                let bv = (b.value)(&in_tuple, std::slice::from_ref(beta));
                if bv.is_zero() {
                    continue;
                }
                let mut key = vec![beta.clone()];
                key.extend(rest.iter().cloned());
                let fv = prev.get(&key);
                if fv.is_zero() {
                    continue;
                }
                total = total.checked_add(&bv.checked_mul(&fv)?.scale(&BigRational::from(BigInt::from(2))))?;
            }
        }
        // C-terms.
        let c = self.op(1, 2, 0)?;
        let in_tuple = vec![tuple[0].clone()];
        let rest: IndexList = (1..n as usize).map(|j| tuple[j].clone()).collect();
        let lower = if g >= 1 {
            match self.f(g - 1, n + 1, RecursionPath::Abcd) {
                Ok(t) => Some(t),
                Err(Error::Unstable(_, _)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        for b1 in &support {
            for b2 in &support {
                let cv = (c.value)(&in_tuple, &[b1.clone(), b2.clone()]);
                if cv.is_zero() {
                    continue;
                }
                let mut bracket = Scalar::zero();
                if let Some(fm) = &lower {
                    let mut key = vec![b1.clone(), b2.clone()];
                    key.extend(rest.iter().cloned());
                    bracket = bracket.checked_add(&fm.get(&key))?;
                }
                // Ordered stable splits.
                for mask in 0..(1u64 << rest.len()) {
                    let (mut i1, mut i2) = (Vec::new(), Vec::new());
                    for (bit, idx) in rest.iter().enumerate() {
                        if mask & (1 << bit) != 0 {
                            i1.push(idx.clone());
                        } else {
                            i2.push(idx.clone());
                        }
                    }
                    for g1 in 0..=g {
                        let g2 = g - g1;
                        let (n1, n2) = (1 + i1.len() as u32, 1 + i2.len() as u32);
                        if Self::check_stable(g1, n1).is_err()
                            || Self::check_stable(g2, n2).is_err()
                        {
                            continue;
                        }
                        let f1 = self.f(g1, n1, RecursionPath::Abcd)?;
                        let f2 = self.f(g2, n2, RecursionPath::Abcd)?;
                        let mut k1 = vec![b1.clone()];
                        k1.extend(i1.iter().cloned());
                        let mut k2 = vec![b2.clone()];
                        k2.extend(i2.iter().cloned());
                        let (v1, v2) = (f1.get(&k1), f2.get(&k2));
                        if v1.is_zero() || v2.is_zero() {
                            continue;
                        }
                        bracket = bracket.checked_add(&v1.checked_mul(&v2)?)?;
                    }
                }
                if !bracket.is_zero() {
                    total = total.checked_add(&cv.checked_mul(&bracket)?)?;
                }
            }
        }
        Ok(total)
    }

    // ------------------------------------------------------------------
    // Derived quantities.
    // ------------------------------------------------------------------

    /// Free energy for g >= 2: (sum_a F_{g,1}[a] pairing[a]) / (2 - 2g).
    pub fn free_energy(&self, g: u32, path: RecursionPath) -> Result<Scalar> {
        if g < 2 {
            return Err(Error::FreeEnergyRange(g));
        }
        let pairing = self.pairing.as_ref().ok_or(Error::MissingPairing)?;
        let f = self.f(g, 1, path)?;
        let mut acc = Scalar::zero();
        for (idx, v) in f.iter() {
            acc = acc.checked_add(&v.checked_mul(&pairing(&idx[0])?)?)?;
        }
        Ok(acc.scale(&BigRational::new(
            BigInt::one(),
            BigInt::from(2i64 - 2 * g as i64),
        )))
    }

    /// Correlator value: sum over entries of F_{g,n} times the product of
    /// basis differentials evaluated at the given coordinates (one coordinate
    /// list per slot).
    pub fn omega_eval(
        &self,
        g: u32,
        n: u32,
        points: &[Vec<Scalar>],
        path: RecursionPath,
    ) -> Result<Scalar> {
        let eval = self.basis_eval.as_ref().ok_or_else(|| {
            Error::InvalidArgument("this family has no basis evaluation".into())
        })?;
        if points.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "expected {n} evaluation points, got {}",
                points.len()
            )));
        }
        let f = self.f(g, n, path)?;
        let mut acc = Scalar::zero();
        for (idx, v) in f.iter() {
            let mut term = v.clone();
            for (i, ix) in idx.iter().enumerate() {
                term = term.checked_mul(&eval(ix, &points[i])?)?;
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }

    /// Pairing value for one index (exposed for diagnostics).
    pub fn pairing_value(&self, idx: &Index) -> Result<Scalar> {
        let pairing = self.pairing.as_ref().ok_or(Error::MissingPairing)?;
        pairing(idx)
    }

    pub fn basis_value(&self, idx: &Index, coords: &[Scalar]) -> Result<Scalar> {
        let eval = self.basis_eval.as_ref().ok_or_else(|| {
            Error::InvalidArgument("this family has no basis evaluation".into())
        })?;
        eval(idx, coords)
    }
}

/// (K-1) / (u! s! h! prod q_i!): the weight of one ordered assignment in the
/// general recursion.
fn multiplicity(k_arity: usize, u: usize, s: usize, h: u32, q: &[usize]) -> BigRational {
    let mut den = special::factorial(u as u64) * special::factorial(s as u64);
    den *= special::factorial(h as u64);
    for &qi in q {
        den *= special::factorial(qi as u64);
    }
    BigRational::new(BigInt::from(k_arity as i64 - 1), den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use std::sync::Arc;

    fn ix(d: u32) -> Index {
        Index::new("0", d)
    }

    /// The minimal quadratic-potential structure: A[0,0,0] = a3, D[1] = d1,
    /// B[d1,d2|d3] supported on d1+d2 <= d3+1, C similar — here a toy family
    /// with A = -1/2, D = -1/48-style values exercising the plumbing.
    fn toy_structure() -> AiryStructure {
        // T_k = 1 if k == 0 else 0 corresponds to B[d1,d2|d3] nonzero only at
        // d3 = d1 + d2 - 1, C at d3 = ... — use the simplest consistent family:
        // A[0,0,0] = 1, B[d1,d2|d3] = delta(d1+d2-1 = d3), C[d1|d2,d3] =
        // delta(d2+d3+2 = d1)... degrees stay in a finite box per level.
        let a = RecursionOperator {
            name: "A".into(),
            n: 3,
            m: 0,
            h: 0,
            labels_in: vec!["i1".into(), "i2".into(), "i3".into()],
            labels_out: vec![],
            candidates: Arc::new(|_out: &[Index]| vec![vec![ix(0), ix(0), ix(0)]]),
            value: Arc::new(|inp: &[Index], _out: &[Index]| {
                if inp.iter().all(|i| i.degree == 0) {
                    Scalar::from_i64(1)
                } else {
                    Scalar::zero()
                }
            }),
        };
        let d = RecursionOperator {
            name: "D".into(),
            n: 1,
            m: 0,
            h: 1,
            labels_in: vec!["i1".into()],
            labels_out: vec![],
            candidates: Arc::new(|_out: &[Index]| vec![vec![ix(1)]]),
            value: Arc::new(|inp: &[Index], _out: &[Index]| {
                if inp[0].degree == 1 {
                    Scalar::rational(1, 24)
                } else {
                    Scalar::zero()
                }
            }),
        };
        let b = RecursionOperator {
            name: "B".into(),
            n: 2,
            m: 1,
            h: 0,
            labels_in: vec!["i1".into(), "i2".into()],
            labels_out: vec!["o1".into()],
            candidates: Arc::new(|out: &[Index]| {
                let d3 = out[0].degree;
                let mut v = Vec::new();
                for d1 in 0..=(d3 + 1) {
                    let d2 = d3 + 1 - d1;
                    v.push(vec![ix(d1), ix(d2)]);
                }
                v
            }),
            value: Arc::new(|inp: &[Index], out: &[Index]| {
                if inp[0].degree + inp[1].degree == out[0].degree + 1 {
                    Scalar::from_i64(1)
                } else {
                    Scalar::zero()
                }
            }),
        };
        let c = RecursionOperator {
            name: "C".into(),
            n: 1,
            m: 2,
            h: 0,
            labels_in: vec!["i1".into()],
            labels_out: vec!["o1".into(), "o2".into()],
            candidates: Arc::new(|out: &[Index]| {
                vec![vec![ix(out[0].degree + out[1].degree + 2)]]
            }),
            value: Arc::new(|inp: &[Index], out: &[Index]| {
                if inp[0].degree == out[0].degree + out[1].degree + 2 {
                    Scalar::from_i64(1)
                } else {
                    Scalar::zero()
                }
            }),
        };
        AiryStructure::new(
            StructureMeta {
                family: "toy".into(),
                params: BTreeMap::new(),
                scalar_kind: "rational".into(),
            },
            Normalization::ThreePointDirect,
            vec![a, b, c, d],
            Box::new(|g, n| (0..=(3 * g + n)).map(ix).collect()),
        )
        .unwrap()
    }

    #[test]
    fn base_cases_materialize() {
        let s = toy_structure();
        let f03 = s.f(0, 3, RecursionPath::Abcd).unwrap();
        assert_eq!(f03.get(&[ix(0), ix(0), ix(0)]), Scalar::from_i64(1));
        assert_eq!(f03.len(), 1);
        let f11 = s.f(1, 1, RecursionPath::Abcd).unwrap();
        assert_eq!(f11.get(&[ix(1)]), Scalar::rational(1, 24));
    }

    #[test]
    fn unstable_cells_are_rejected() {
        let s = toy_structure();
        assert!(matches!(s.f(0, 2, RecursionPath::Abcd), Err(Error::Unstable(0, 2))));
        assert!(matches!(s.f(0, 0, RecursionPath::Abcd), Err(Error::Unstable(0, 0))));
        assert!(matches!(s.f(1, 0, RecursionPath::General), Err(Error::Unstable(1, 0))));
    }

    #[test]
    fn paths_agree_on_toy_family() {
        let s = toy_structure();
        for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1)] {
            let a = s.f(g, n, RecursionPath::Abcd).unwrap();
            let b = s.f(g, n, RecursionPath::General).unwrap();
            assert_eq!(a, b, "paths disagree at ({g},{n})");
        }
    }

    #[test]
    fn value_matches_table() {
        let s = toy_structure();
        let t = s.f(1, 2, RecursionPath::Abcd).unwrap();
        for (idx, v) in t.iter() {
            let direct = s.value_abcd(1, 2, idx).unwrap();
            assert_eq!(&direct, v);
            let general = s.value_general(1, 2, idx).unwrap();
            assert_eq!(&general, v);
        }
    }

    #[test]
    fn multiplicity_values() {
        // Three-point signature: (K-1)/u! = 2/2 = 1.
        assert_eq!(multiplicity(3, 2, 0, 0, &[]), BigRational::from(BigInt::from(1)));
        // B signature: 2/1 = 2.
        assert_eq!(multiplicity(3, 1, 1, 0, &[1]), BigRational::from(BigInt::from(2)));
        // C one-part: 2/2! = 1.
        assert_eq!(multiplicity(3, 0, 1, 0, &[2]), BigRational::from(BigInt::from(1)));
        // C split: 2/2! = 1.
        assert_eq!(multiplicity(3, 0, 2, 0, &[1, 1]), BigRational::from(BigInt::from(1)));
        // Four-point one-part: 3/(2! 1! 1!) = 3/2.
        assert_eq!(
            multiplicity(4, 2, 1, 0, &[1]),
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
    }

    #[test]
    fn cap_is_enforced() {
        let s = toy_structure().with_tuple_cap(2);
        match s.f(0, 4, RecursionPath::General) {
            Err(Error::CapExceeded(0, 4, _)) => {}
            other => panic!("expected cap exceeded, got {other:?}"),
        }
    }

    #[test]
    fn free_energy_needs_pairing_and_range() {
        let s = toy_structure();
        assert!(matches!(s.free_energy(1, RecursionPath::Abcd), Err(Error::FreeEnergyRange(1))));
        assert!(matches!(s.free_energy(2, RecursionPath::Abcd), Err(Error::MissingPairing)));
    }
}
