//! Labeled sparse tensors over exact scalars, plus the recursion-operator
//! contraction primitive.
//!
//! A tensor's rank is its label list; entries are keyed by index tuples aligned
//! positionally with the labels. Zeros are never stored. Tensors are immutable
//! and cheap to relabel (entry maps are shared behind an `Arc`).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;
use crate::{Error, Result};

/// A ramification-point name. Comparison is numeric when both names parse as
/// integers (so "-1" sorts before "+1"), falling back to string order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point(Arc<str>);

impl Point {
    pub fn new(name: &str) -> Self {
        Point(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Point {
    fn from(s: &str) -> Self {
        Point::new(s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        let a: Option<i64> = self.0.parse().ok();
        let b: Option<i64> = other.0.parse().ok();
        match (a, b) {
            (Some(x), Some(y)) => x.cmp(&y).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A basis index: a ramification point together with a degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub point: Point,
    pub degree: u32,
}

impl Index {
    pub fn new(point: impl Into<Point>, degree: u32) -> Self {
        Index { point: point.into(), degree }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.point, self.degree)
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        (self.point.as_str(), self.degree).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (point, degree) = <(String, u32)>::deserialize(deserializer)?;
        Ok(Index::new(point.as_str(), degree))
    }
}

pub type IndexList = Vec<Index>;

/// Sparse labeled tensor; fully immutable once frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTensor {
    labels: Vec<String>,
    entries: Arc<HashMap<IndexList, Scalar>>,
}

/// Accumulating builder for [`LabeledTensor`].
pub struct TensorBuilder {
    labels: Vec<String>,
    entries: HashMap<IndexList, Scalar>,
}

impl TensorBuilder {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::Label(format!("duplicate labels in {labels:?}")));
        }
        Ok(Self { labels, entries: HashMap::new() })
    }

    /// Add `value` into the entry at `idx`.
    pub fn accumulate(&mut self, idx: IndexList, value: Scalar) -> Result<()> {
        if idx.len() != self.labels.len() {
            return Err(Error::Label(format!(
                "index tuple has arity {} but tensor has rank {}",
                idx.len(),
                self.labels.len()
            )));
        }
        if value.is_zero() {
            return Ok(());
        }
        match self.entries.entry(idx) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let sum = e.get().checked_add(&value)?;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(value);
            }
        }
        Ok(())
    }

    pub fn freeze(self) -> LabeledTensor {
        LabeledTensor { labels: self.labels, entries: Arc::new(self.entries) }
    }
}

impl LabeledTensor {
    pub fn zero(labels: Vec<String>) -> Result<Self> {
        Ok(TensorBuilder::new(labels)?.freeze())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexList, &Scalar)> {
        self.entries.iter()
    }

    /// Entry at the exact key (zero when absent).
    pub fn get(&self, idx: &[Index]) -> Scalar {
        self.entries.get(idx).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Entry at the key sorted canonically — the lookup for tensors stored
    /// with sorted keys and symmetric semantics.
    pub fn get_symmetric(&self, idx: &[Index]) -> Scalar {
        let mut key = idx.to_vec();
        key.sort();
        self.get(&key)
    }

    /// Same entries under new labels (positional); O(1), entries are shared.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::Label(format!(
                "relabel arity mismatch: {} labels for rank {}",
                labels.len(),
                self.labels.len()
            )));
        }
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::Label(format!("duplicate labels in {labels:?}")));
        }
        Ok(Self { labels, entries: Arc::clone(&self.entries) })
    }

    /// Sum; the label sets must agree as sets, rhs entries are permuted into
    /// this tensor's label order.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let perm = alignment(&rhs.labels, &self.labels)?;
        let mut b = TensorBuilder::new(self.labels.clone())?;
        for (idx, v) in self.iter() {
            b.accumulate(idx.clone(), v.clone())?;
        }
        for (idx, v) in rhs.iter() {
            let permuted: IndexList = perm.iter().map(|&i| idx[i].clone()).collect();
            b.accumulate(permuted, v.clone())?;
        }
        Ok(b.freeze())
    }

    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        let mut b = TensorBuilder::new(self.labels.clone())?;
        for (idx, v) in self.iter() {
            b.accumulate(idx.clone(), v.checked_mul(c)?)?;
        }
        Ok(b.freeze())
    }

    /// Outer product; label sets must be disjoint.
    pub fn tensor_product(&self, rhs: &Self) -> Result<Self> {
        let mut labels = self.labels.clone();
        for l in &rhs.labels {
            if labels.contains(l) {
                return Err(Error::Label(format!(
                    "tensor product label collision on {l:?}"
                )));
            }
            labels.push(l.clone());
        }
        let mut b = TensorBuilder::new(labels)?;
        for (i1, v1) in self.iter() {
            for (i2, v2) in rhs.iter() {
                let mut idx = i1.clone();
                idx.extend_from_slice(i2);
                b.accumulate(idx, v1.checked_mul(v2)?)?;
            }
        }
        Ok(b.freeze())
    }

    /// Average over all slot permutations (divides by rank!).
    pub fn symmetrized(&self) -> Result<Self> {
        let n = self.rank();
        let perms = permutations(n);
        let factor = Scalar::rational(1, perms.len() as i64);
        let mut b = TensorBuilder::new(self.labels.clone())?;
        for (idx, v) in self.iter() {
            let contribution = v.checked_mul(&factor)?;
            for p in &perms {
                let permuted: IndexList = p.iter().map(|&i| idx[i].clone()).collect();
                b.accumulate(permuted, contribution.clone())?;
            }
        }
        Ok(b.freeze())
    }
}

/// perm[j] = position in `from` of the label `to[j]`.
fn alignment(from: &[String], to: &[String]) -> Result<Vec<usize>> {
    if from.len() != to.len() {
        return Err(Error::Label(format!(
            "label sets {from:?} and {to:?} differ in rank"
        )));
    }
    to.iter()
        .map(|l| {
            from.iter()
                .position(|f| f == l)
                .ok_or_else(|| Error::Label(format!("label {l:?} missing from {from:?}")))
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heaps(&mut cur, n, &mut out);
    out
}

fn heaps(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heaps(cur, k - 1, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// A sparse ABCD-style operator with `n` input slots, `m` output slots, and a
/// genus weight `h`. Entries are delivered lazily: `candidates` lists, for a
/// fixed output tuple, every input tuple with a possibly nonzero entry, and
/// `value` evaluates an entry.
#[derive(Clone)]
pub struct RecursionOperator {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub h: u32,
    pub labels_in: Vec<String>,
    pub labels_out: Vec<String>,
    pub candidates: Arc<dyn Fn(&[Index]) -> Vec<IndexList> + Send + Sync>,
    pub value: Arc<dyn Fn(&[Index], &[Index]) -> Scalar + Send + Sync>,
}

impl fmt::Debug for RecursionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecursionOperator")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("h", &self.h)
            .field("labels_in", &self.labels_in)
            .field("labels_out", &self.labels_out)
            .finish_non_exhaustive()
    }
}

impl RecursionOperator {
    /// The same operator under fresh slot labels.
    pub fn with_labels(&self, labels_in: Vec<String>, labels_out: Vec<String>) -> Result<Self> {
        if labels_in.len() != self.n || labels_out.len() != self.m {
            return Err(Error::Label(format!(
                "operator {} has arity ({}, {}), got labels ({}, {})",
                self.name,
                self.n,
                self.m,
                labels_in.len(),
                labels_out.len()
            )));
        }
        let mut clone = self.clone();
        clone.labels_in = labels_in;
        clone.labels_out = labels_out;
        Ok(clone)
    }

    /// Materialize the operator as a tensor over labels_in ++ labels_out.
    /// Only valid bases (m = 0) enumerate from an empty output tuple.
    pub fn to_tensor(&self) -> Result<LabeledTensor> {
        if self.m != 0 {
            return Err(Error::Label(format!(
                "operator {} has {} output slots; only closed operators materialize",
                self.name, self.m
            )));
        }
        let mut b = TensorBuilder::new(self.labels_in.clone())?;
        for idx in (self.candidates)(&[]) {
            let v = (self.value)(&idx, &[]);
            b.accumulate(idx, v)?;
        }
        Ok(b.freeze())
    }
}

/// Contract a recursion operator against a tensor.
///
/// `on` names the labels of `t` fed into the operator's output slots, matched
/// positionally against `labels_out`; every output slot must be consumed. The
/// result carries labels_in followed by the unconsumed labels of `t`.
pub fn contract(op: &RecursionOperator, t: &LabeledTensor, on: &[&str]) -> Result<LabeledTensor> {
    if op.m == 0 {
        return Err(Error::Label(format!(
            "operator {} has no output labels to contract",
            op.name
        )));
    }
    if on.len() != op.m {
        return Err(Error::Label(format!(
            "operator {} needs {} contraction labels, got {}",
            op.name,
            op.m,
            on.len()
        )));
    }
    // Positions in t of the contracted labels, aligned with labels_out.
    let positions: Vec<usize> = on
        .iter()
        .map(|l| {
            t.labels()
                .iter()
                .position(|tl| tl == l)
                .ok_or_else(|| Error::Label(format!("label {l:?} missing from {:?}", t.labels())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rest_positions: Vec<usize> = (0..t.rank()).filter(|i| !positions.contains(i)).collect();
    rest_positions.sort_unstable();

    let mut labels = op.labels_in.clone();
    for &i in &rest_positions {
        let l = &t.labels()[i];
        if labels.contains(l) {
            return Err(Error::Label(format!(
                "contraction result would duplicate label {l:?}"
            )));
        }
        labels.push(l.clone());
    }

    let mut b = TensorBuilder::new(labels)?;
    for (idx, tv) in t.iter() {
        let out_tuple: IndexList = positions.iter().map(|&i| idx[i].clone()).collect();
        let rest: IndexList = rest_positions.iter().map(|&i| idx[i].clone()).collect();
        for in_tuple in (op.candidates)(&out_tuple) {
            let ov = (op.value)(&in_tuple, &out_tuple);
            if ov.is_zero() {
                continue;
            }
            let mut key = in_tuple;
            key.extend_from_slice(&rest);
            b.accumulate(key, ov.checked_mul(tv)?)?;
        }
    }
    Ok(b.freeze())
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    idx: Vec<Index>,
    value: Scalar,
}

impl Serialize for LabeledTensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries: Vec<(&IndexList, &Scalar)> = self.entries.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let reprs: Vec<EntryRepr> = entries
            .into_iter()
            .map(|(idx, value)| EntryRepr { idx: idx.clone(), value: value.clone() })
            .collect();
        let mut m = serializer.serialize_map(Some(2))?;
        m.serialize_entry("labels", &self.labels)?;
        m.serialize_entry("entries", &reprs)?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for LabeledTensor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct TensorRepr {
            labels: Vec<String>,
            entries: Vec<EntryRepr>,
        }
        let repr = TensorRepr::deserialize(deserializer)?;
        let mut b = TensorBuilder::new(repr.labels).map_err(D::Error::custom)?;
        let mut count = 0usize;
        for e in repr.entries {
            count += 1;
            b.accumulate(e.idx, e.value).map_err(D::Error::custom)?;
        }
        let t = b.freeze();
        if t.len() != count {
            return Err(D::Error::custom("duplicate or zero entries in tensor"));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(p: &str, d: u32) -> Index {
        Index::new(p, d)
    }

    fn rational_tensor(labels: &[&str], entries: &[(&[(&str, u32)], i64, i64)]) -> LabeledTensor {
        let mut b = TensorBuilder::new(labels.iter().map(|s| s.to_string()).collect()).unwrap();
        for (idx, n, d) in entries {
            let key: IndexList = idx.iter().map(|(p, k)| ix(p, *k)).collect();
            b.accumulate(key, Scalar::rational(*n, *d)).unwrap();
        }
        b.freeze()
    }

    #[test]
    fn point_ordering_is_numeric_when_possible() {
        assert!(Point::new("-1") < Point::new("+1"));
        assert!(Point::new("2") < Point::new("10"));
        assert!(Point::new("1") < Point::new("a"));
        assert!(Point::new("a1") < Point::new("a2"));
    }

    #[test]
    fn builder_accumulates_and_drops_zeros() {
        let mut b = TensorBuilder::new(vec!["x".into()]).unwrap();
        b.accumulate(vec![ix("0", 1)], Scalar::rational(1, 2)).unwrap();
        b.accumulate(vec![ix("0", 1)], Scalar::rational(1, 2)).unwrap();
        b.accumulate(vec![ix("0", 2)], Scalar::rational(1, 3)).unwrap();
        b.accumulate(vec![ix("0", 2)], Scalar::rational(-1, 3)).unwrap();
        let t = b.freeze();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&[ix("0", 1)]), Scalar::from_i64(1));
        assert_eq!(t.get(&[ix("0", 2)]), Scalar::zero());
    }

    #[test]
    fn relabel_shares_entries() {
        let t = rational_tensor(&["x1", "x2"], &[(&[("0", 1), ("0", 2)], 5, 1)]);
        let r = t.relabel(vec!["b".into(), "a".into()]).unwrap();
        assert_eq!(r.labels(), &["b".to_string(), "a".to_string()]);
        assert_eq!(r.get(&[ix("0", 1), ix("0", 2)]), Scalar::from_i64(5));
        assert!(t.relabel(vec!["a".into()]).is_err());
        assert!(t.relabel(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn add_aligns_by_label_name() {
        let t = rational_tensor(&["a", "b"], &[(&[("0", 1), ("0", 2)], 1, 1)]);
        let u = rational_tensor(&["b", "a"], &[(&[("0", 2), ("0", 1)], 3, 1)]);
        let sum = t.add(&u).unwrap();
        assert_eq!(sum.get(&[ix("0", 1), ix("0", 2)]), Scalar::from_i64(4));
        assert_eq!(sum.len(), 1);
    }

    #[test]
    fn product_requires_disjoint_labels() {
        let t = rational_tensor(&["a"], &[(&[("0", 1)], 2, 1)]);
        let u = rational_tensor(&["b"], &[(&[("0", 5)], 7, 1)]);
        let p = t.tensor_product(&u).unwrap();
        assert_eq!(p.get(&[ix("0", 1), ix("0", 5)]), Scalar::from_i64(14));
        assert!(t.tensor_product(&t).is_err());
    }

    #[test]
    fn symmetrization() {
        let t = rational_tensor(&["a", "b"], &[(&[("0", 1), ("0", 2)], 1, 1)]);
        let s = t.symmetrized().unwrap();
        assert_eq!(s.get(&[ix("0", 1), ix("0", 2)]), Scalar::rational(1, 2));
        assert_eq!(s.get(&[ix("0", 2), ix("0", 1)]), Scalar::rational(1, 2));
    }

    #[test]
    fn contraction_consumes_all_output_slots() {
        // op[d_in | d_out] = d_out, nonzero for d_in in {d_out, d_out + 1}.
        let op = RecursionOperator {
            name: "test".into(),
            n: 1,
            m: 1,
            h: 0,
            labels_in: vec!["y".into()],
            labels_out: vec!["o".into()],
            candidates: Arc::new(|out: &[Index]| {
                vec![
                    vec![Index::new(out[0].point.as_str(), out[0].degree)],
                    vec![Index::new(out[0].point.as_str(), out[0].degree + 1)],
                ]
            }),
            value: Arc::new(|_inp: &[Index], out: &[Index]| Scalar::from_i64(out[0].degree as i64)),
        };
        let t = rational_tensor(&["p", "q"], &[(&[("0", 2), ("0", 7)], 1, 1)]);
        let r = contract(&op, &t, &["p"]).unwrap();
        assert_eq!(r.labels(), &["y".to_string(), "q".to_string()]);
        // out tuple (0:2) gives value 2 at in-candidates degrees 2 and 3.
        assert_eq!(r.get(&[ix("0", 2), ix("0", 7)]), Scalar::from_i64(2));
        assert_eq!(r.get(&[ix("0", 3), ix("0", 7)]), Scalar::from_i64(2));
        // Contracting on a label the tensor lacks fails.
        assert!(contract(&op, &t, &["zz"]).is_err());
        // Wrong number of contraction labels fails.
        assert!(contract(&op, &t, &["p", "q"]).is_err());
    }

    #[test]
    fn closed_operators_materialize() {
        let op = RecursionOperator {
            name: "base".into(),
            n: 2,
            m: 0,
            h: 0,
            labels_in: vec!["x1".into(), "x2".into()],
            labels_out: vec![],
            candidates: Arc::new(|_out: &[Index]| {
                vec![vec![Index::new("0", 0), Index::new("0", 1)]]
            }),
            value: Arc::new(|_inp: &[Index], _out: &[Index]| Scalar::rational(-1, 2)),
        };
        let t = op.to_tensor().unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&[ix("0", 0), ix("0", 1)]), Scalar::rational(-1, 2));
        let dummy = rational_tensor(&["a"], &[(&[("0", 0)], 1, 1)]);
        assert!(contract(&op, &dummy, &[]).is_err());
    }

    #[test]
    fn json_roundtrip_sorted() {
        let t = rational_tensor(
            &["x1", "x2"],
            &[
                (&[("0", 3), ("0", 1)], 1, 2),
                (&[("0", 1), ("0", 2)], -5, 3),
            ],
        );
        let json = serde_json::to_string(&t).unwrap();
        // Sorted by index tuple: (0:1,0:2) before (0:3,0:1).
        let i12 = json.find(r#"[["0",1],["0",2]]"#).unwrap();
        let i31 = json.find(r#"[["0",3],["0",1]]"#).unwrap();
        assert!(i12 < i31);
        let back: LabeledTensor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
