//! Finite commutative integral quantales.
//!
//! A [`Quantale`] is a finite complete lattice with a commutative monoid
//! product whose unit is the top element and which distributes over
//! arbitrary joins. Every operation is a table lookup: meet, join and the
//! residuum are derived once at construction time.

mod builtin;
mod suite;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtin::{
    boolean_algebra, builtin, godel_chain, heyting_from_poset, lukasiewicz_chain, Poset,
};
pub use suite::{check_heyting_collapse, residuum_oracle_check, validate_theorem_suite};

/// Largest carrier a [`Quantale`] may have; elements are stored as `u8`.
pub const MAX_CARRIER: usize = 256;

/// Subsets are checked exhaustively for join-distributivity up to this size.
const EXHAUSTIVE_DISTRIBUTIVITY_MAX: usize = 12;
const RANDOM_DISTRIBUTIVITY_SAMPLES: usize = 10_000;

/// An element of one specific quantale, identified by its carrier index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QElem(u8);

impl QElem {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(index: usize) -> Self {
        debug_assert!(index < MAX_CARRIER);
        QElem(index as u8)
    }

    pub(crate) fn raw(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantaleError {
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("carrier has {0} elements, at most {MAX_CARRIER} are supported")]
    CarrierTooLarge(usize),
    #[error("{table} table has shape mismatch: {detail}")]
    Shape { table: &'static str, detail: String },
    #[error("{what} index {index} is outside the carrier of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("order is not reflexive at {x}")]
    NotReflexive { x: String },
    #[error("order is not antisymmetric: {x} <= {y} and {y} <= {x}")]
    NotAntisymmetric { x: String, y: String },
    #[error("order is not transitive: {x} <= {y} <= {z} but not {x} <= {z}")]
    NotTransitive { x: String, y: String, z: String },
    #[error("{x} and {y} have no least upper bound")]
    NoJoin { x: String, y: String },
    #[error("{x} and {y} have no greatest lower bound")]
    NoMeet { x: String, y: String },
    #[error("declared bottom is not below {x}")]
    BottomNotLeast { x: String },
    #[error("declared top is not above {x}")]
    TopNotGreatest { x: String },
    #[error("product is not commutative at ({x}, {y})")]
    NotCommutative { x: String, y: String },
    #[error("product is not associative at ({x}, {y}, {z})")]
    NotAssociative { x: String, y: String, z: String },
    #[error("top is not the unit of the product: top * {x} != {x}")]
    TopNotUnit { x: String },
    #[error("product does not distribute over the join of {subset:?} at {x}")]
    NotDistributive { x: String, subset: Vec<String> },
    #[error("residuum adjunction fails at ({x}, {y}, {z})")]
    AdjunctionFails { x: String, y: String, z: String },
    #[error("element {0} does not belong to this quantale")]
    ForeignElement(usize),
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("unknown built-in quantale `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter for `{name}`: {detail}")]
    BadParameter { name: String, detail: String },
}

/// Serialized form of a user-supplied quantale table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantaleFile {
    pub labels: Vec<String>,
    pub leq: Vec<Vec<u8>>,
    pub product: Vec<Vec<usize>>,
    pub bottom: usize,
    pub top: usize,
}

impl QuantaleFile {
    pub fn build(&self, name: impl Into<String>) -> Result<Quantale, QuantaleError> {
        let n = self.labels.len();
        if self.leq.len() != n || self.leq.iter().any(|row| row.len() != n) {
            return Err(QuantaleError::Shape {
                table: "leq",
                detail: format!("expected {n}x{n}"),
            });
        }
        let mut leq = Vec::with_capacity(n * n);
        for row in &self.leq {
            for &v in row {
                match v {
                    0 => leq.push(false),
                    1 => leq.push(true),
                    other => {
                        return Err(QuantaleError::Shape {
                            table: "leq",
                            detail: format!("entries must be 0 or 1, found {other}"),
                        })
                    }
                }
            }
        }
        Quantale::build_from_tables(
            name,
            self.labels.clone(),
            leq,
            self.product.clone(),
            self.bottom,
            self.top,
        )
    }
}

/// A validated finite commutative integral quantale.
#[derive(Clone, PartialEq, Eq)]
pub struct Quantale {
    name: String,
    labels: Vec<String>,
    n: usize,
    leq: Vec<bool>,
    product: Vec<u8>,
    meet: Vec<u8>,
    join: Vec<u8>,
    residuum: Vec<u8>,
    neg: Vec<u8>,
    bottom: QElem,
    top: QElem,
}

impl fmt::Debug for Quantale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Quantale")
            .field("name", &self.name)
            .field("labels", &self.labels)
            .finish()
    }
}

impl Quantale {
    /// Validates the tables and precomputes meet, join, residuum and negation.
    ///
    /// Every failed axiom is reported with the concrete elements that break it.
    pub fn build_from_tables(
        name: impl Into<String>,
        labels: Vec<String>,
        leq: Vec<bool>,
        product: Vec<Vec<usize>>,
        bottom: usize,
        top: usize,
    ) -> Result<Self, QuantaleError> {
        let n = labels.len();
        if n == 0 {
            return Err(QuantaleError::EmptyCarrier);
        }
        if n > MAX_CARRIER {
            return Err(QuantaleError::CarrierTooLarge(n));
        }
        if leq.len() != n * n {
            return Err(QuantaleError::Shape {
                table: "leq",
                detail: format!("expected {} entries, found {}", n * n, leq.len()),
            });
        }
        if product.len() != n || product.iter().any(|row| row.len() != n) {
            return Err(QuantaleError::Shape {
                table: "product",
                detail: format!("expected {n}x{n}"),
            });
        }
        for (what, index) in [("bottom", bottom), ("top", top)] {
            if index >= n {
                return Err(QuantaleError::IndexOutOfRange { what, index, size: n });
            }
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &product {
            for &v in row {
                if v >= n {
                    return Err(QuantaleError::IndexOutOfRange {
                        what: "product entry",
                        index: v,
                        size: n,
                    });
                }
                flat.push(v as u8);
            }
        }

        let label = |i: usize| labels[i].clone();
        let le = |x: usize, y: usize| leq[x * n + y];

        for x in 0..n {
            if !le(x, x) {
                return Err(QuantaleError::NotReflexive { x: label(x) });
            }
        }
        for x in 0..n {
            for y in 0..n {
                if x != y && le(x, y) && le(y, x) {
                    return Err(QuantaleError::NotAntisymmetric { x: label(x), y: label(y) });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                if !le(x, y) {
                    continue;
                }
                for z in 0..n {
                    if le(y, z) && !le(x, z) {
                        return Err(QuantaleError::NotTransitive {
                            x: label(x),
                            y: label(y),
                            z: label(z),
                        });
                    }
                }
            }
        }
        for x in 0..n {
            if !le(bottom, x) {
                return Err(QuantaleError::BottomNotLeast { x: label(x) });
            }
            if !le(x, top) {
                return Err(QuantaleError::TopNotGreatest { x: label(x) });
            }
        }

        let mut join = vec![0u8; n * n];
        let mut meet = vec![0u8; n * n];
        for x in 0..n {
            for y in 0..n {
                let uppers: Vec<usize> = (0..n).filter(|&u| le(x, u) && le(y, u)).collect();
                let least = uppers.iter().copied().find(|&u| uppers.iter().all(|&v| le(u, v)));
                match least {
                    Some(u) => join[x * n + y] = u as u8,
                    None => return Err(QuantaleError::NoJoin { x: label(x), y: label(y) }),
                }
                let lowers: Vec<usize> = (0..n).filter(|&l| le(l, x) && le(l, y)).collect();
                let greatest = lowers.iter().copied().find(|&l| lowers.iter().all(|&v| le(v, l)));
                match greatest {
                    Some(l) => meet[x * n + y] = l as u8,
                    None => return Err(QuantaleError::NoMeet { x: label(x), y: label(y) }),
                }
            }
        }

        let mul = |x: usize, y: usize| flat[x * n + y] as usize;
        for x in 0..n {
            for y in 0..n {
                if mul(x, y) != mul(y, x) {
                    return Err(QuantaleError::NotCommutative { x: label(x), y: label(y) });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if mul(mul(x, y), z) != mul(x, mul(y, z)) {
                        return Err(QuantaleError::NotAssociative {
                            x: label(x),
                            y: label(y),
                            z: label(z),
                        });
                    }
                }
            }
        }
        for x in 0..n {
            if mul(top, x) != x {
                return Err(QuantaleError::TopNotUnit { x: label(x) });
            }
        }

        let sup = |set: &mut dyn Iterator<Item = usize>| {
            set.fold(bottom, |acc, s| join[acc * n + s] as usize)
        };
        let check_subset = |members: &[usize]| -> Result<(), QuantaleError> {
            let s = sup(&mut members.iter().copied());
            for x in 0..n {
                let lhs = mul(x, s);
                let rhs = sup(&mut members.iter().map(|&m| mul(x, m)));
                if lhs != rhs {
                    return Err(QuantaleError::NotDistributive {
                        x: label(x),
                        subset: members.iter().map(|&m| label(m)).collect(),
                    });
                }
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_DISTRIBUTIVITY_MAX {
            let mut members = Vec::with_capacity(n);
            for mask in 0u32..(1u32 << n) {
                members.clear();
                members.extend((0..n).filter(|i| mask & (1 << i) != 0));
                check_subset(&members)?;
            }
        } else {
            check_subset(&[])?;
            for a in 0..n {
                for b in a..n {
                    check_subset(&[a, b])?;
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_1a77_1ce5);
            let mut members = Vec::with_capacity(n);
            for _ in 0..RANDOM_DISTRIBUTIVITY_SAMPLES {
                members.clear();
                members.extend((0..n).filter(|_| rng.gen_bool(0.5)));
                check_subset(&members)?;
            }
        }

        let mut residuum = vec![0u8; n * n];
        for x in 0..n {
            for y in 0..n {
                let r = sup(&mut (0..n).filter(|&z| le(mul(x, z), y)));
                residuum[x * n + y] = r as u8;
            }
        }
        for x in 0..n {
            for y in 0..n {
                let r = residuum[x * n + y] as usize;
                for z in 0..n {
                    if le(mul(x, z), y) != le(z, r) {
                        return Err(QuantaleError::AdjunctionFails {
                            x: label(x),
                            y: label(y),
                            z: label(z),
                        });
                    }
                }
            }
        }
        let neg = (0..n).map(|x| residuum[x * n + bottom]).collect();

        Ok(Quantale {
            name: name.into(),
            labels,
            n,
            leq,
            product: flat,
            meet,
            join,
            residuum,
            neg,
            bottom: QElem::from_index(bottom),
            top: QElem::from_index(top),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bottom(&self) -> QElem {
        self.bottom
    }

    pub fn top(&self) -> QElem {
        self.top
    }

    pub fn elements(&self) -> impl Iterator<Item = QElem> + '_ {
        (0..self.n).map(QElem::from_index)
    }

    pub fn label(&self, x: QElem) -> &str {
        &self.labels[x.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn by_label(&self, label: &str) -> Option<QElem> {
        self.labels.iter().position(|l| l == label).map(QElem::from_index)
    }

    /// Returns the element with `index`, or an error if it is not in the carrier.
    pub fn elem(&self, index: usize) -> Result<QElem, QuantaleError> {
        if index < self.n {
            Ok(QElem::from_index(index))
        } else {
            Err(QuantaleError::ForeignElement(index))
        }
    }

    pub fn contains(&self, x: QElem) -> bool {
        x.index() < self.n
    }

    pub fn is_two_valued(&self, x: QElem) -> bool {
        x == self.bottom || x == self.top
    }

    pub fn leq(&self, x: QElem, y: QElem) -> bool {
        self.leq[x.index() * self.n + y.index()]
    }

    pub fn meet(&self, x: QElem, y: QElem) -> QElem {
        QElem(self.meet[x.index() * self.n + y.index()])
    }

    pub fn join(&self, x: QElem, y: QElem) -> QElem {
        QElem(self.join[x.index() * self.n + y.index()])
    }

    pub fn product(&self, x: QElem, y: QElem) -> QElem {
        QElem(self.product[x.index() * self.n + y.index()])
    }

    pub fn residuum(&self, x: QElem, y: QElem) -> QElem {
        QElem(self.residuum[x.index() * self.n + y.index()])
    }

    pub fn neg(&self, x: QElem) -> QElem {
        QElem(self.neg[x.index()])
    }

    /// `(x -> y) * (y -> x)`
    pub fn equiv(&self, x: QElem, y: QElem) -> QElem {
        self.product(self.residuum(x, y), self.residuum(y, x))
    }

    /// `x^0 = top`, `x^(n+1) = x * x^n`.
    pub fn power(&self, x: QElem, n: u32) -> QElem {
        (0..n).fold(self.top, |acc, _| self.product(x, acc))
    }

    /// Supremum of an arbitrary (finite) family; the empty join is bottom.
    pub fn sup(&self, items: impl IntoIterator<Item = QElem>) -> QElem {
        items.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    /// Infimum of an arbitrary (finite) family; the empty meet is top.
    pub fn inf(&self, items: impl IntoIterator<Item = QElem>) -> QElem {
        items.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn is_idempotent(&self) -> bool {
        self.elements().all(|x| self.product(x, x) == x)
    }

    /// Raw operation tables, indexed `x * size + y`, for the valuation kernels.
    pub(crate) fn tables(&self) -> OpTables<'_> {
        OpTables {
            n: self.n,
            product: &self.product,
            meet: &self.meet,
            join: &self.join,
            residuum: &self.residuum,
            neg: &self.neg,
            bottom: self.bottom.0,
            top: self.top.0,
        }
    }

    /// Exports the defining tables in the file format accepted by [`QuantaleFile::build`].
    pub fn to_file(&self) -> QuantaleFile {
        let n = self.n;
        QuantaleFile {
            labels: self.labels.clone(),
            leq: (0..n)
                .map(|x| (0..n).map(|y| self.leq[x * n + y] as u8).collect())
                .collect(),
            product: (0..n)
                .map(|x| (0..n).map(|y| self.product[x * n + y] as usize).collect())
                .collect(),
            bottom: self.bottom.index(),
            top: self.top.index(),
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) struct OpTables<'q> {
    pub n: usize,
    pub product: &'q [u8],
    pub meet: &'q [u8],
    pub join: &'q [u8],
    pub residuum: &'q [u8],
    pub neg: &'q [u8],
    pub bottom: u8,
    pub top: u8,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boolean2() -> Quantale {
        Quantale::build_from_tables(
            "b",
            vec!["0".into(), "1".into()],
            vec![true, true, false, true],
            vec![vec![0, 0], vec![0, 1]],
            0,
            1,
        )
        .unwrap()
    }

    #[test]
    fn two_element_boolean_is_valid() {
        let q = boolean2();
        assert_eq!(q.size(), 2);
        assert_eq!(q.residuum(q.top(), q.bottom()), q.bottom());
        assert_eq!(q.neg(q.bottom()), q.top());
    }

    #[test]
    fn non_commutative_product_names_the_pair() {
        // 3-chain where 1/2 * 1 = 1/2 but 1 * 1/2 = 0.
        let leq = vec![true, true, true, false, true, true, false, false, true];
        let err = Quantale::build_from_tables(
            "bad",
            vec!["0".into(), "h".into(), "1".into()],
            leq,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 0, 2]],
            0,
            2,
        )
        .unwrap_err();
        assert_eq!(err, QuantaleError::NotCommutative { x: "h".into(), y: "1".into() });
    }

    #[test]
    fn non_associative_product_is_rejected_with_triple() {
        let q = lukasiewicz_chain(4).unwrap();
        let mut file = q.to_file();
        // break associativity but keep commutativity: 1/3 * 1/3 := 1/3
        file.product[1][1] = 1;
        let err = file.build("broken").unwrap_err();
        assert!(
            matches!(err, QuantaleError::NotAssociative { .. } | QuantaleError::NotDistributive { .. } | QuantaleError::AdjunctionFails { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn missing_join_is_reported() {
        // two incomparable maximal elements above bottom with a declared "top" that is one of them
        let labels = vec!["0".into(), "a".into(), "b".into()];
        let leq = vec![true, true, true, false, true, false, false, false, true];
        let err = Quantale::build_from_tables("v", labels, leq, vec![vec![0; 3]; 3], 0, 1)
            .unwrap_err();
        assert_eq!(err, QuantaleError::TopNotGreatest { x: "b".into() });
    }

    #[test]
    fn shape_errors() {
        let err = Quantale::build_from_tables(
            "s",
            vec!["0".into(), "1".into()],
            vec![true, true, false],
            vec![vec![0, 0], vec![0, 1]],
            0,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, QuantaleError::Shape { table: "leq", .. }));
        let err = Quantale::build_from_tables(
            "s",
            vec!["0".into(), "1".into()],
            vec![true, true, false, true],
            vec![vec![0, 0], vec![0, 7]],
            0,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, QuantaleError::IndexOutOfRange { index: 7, .. }));
    }

    #[test]
    fn foreign_element_is_an_error() {
        let q = boolean2();
        assert_eq!(q.elem(5), Err(QuantaleError::ForeignElement(5)));
        assert!(q.elem(1).is_ok());
    }

    #[test]
    fn power_and_equiv() {
        let q = lukasiewicz_chain(5).unwrap();
        for x in q.elements() {
            assert_eq!(q.power(x, 0), q.top());
            assert_eq!(q.power(x, 1), x);
            assert_eq!(q.equiv(x, x), q.top());
        }
        let three_q = q.by_label("3/4").unwrap();
        assert_eq!(q.power(three_q, 2), q.by_label("1/2").unwrap());
        assert_eq!(q.power(three_q, 4), q.bottom());
    }

    #[test]
    fn file_round_trip_rebuilds_the_same_quantale() {
        let q = godel_chain(4).unwrap();
        let text = serde_json::to_string(&q.to_file()).unwrap();
        let file: QuantaleFile = serde_json::from_str(&text).unwrap();
        let again = file.build(q.name()).unwrap();
        assert_eq!(again, q);
    }

    #[test]
    fn large_carrier_uses_sampled_distributivity() {
        let q = lukasiewicz_chain(20).unwrap();
        assert_eq!(q.size(), 20);
        assert_eq!(q.residuum(q.bottom(), q.bottom()), q.top());
    }
}
