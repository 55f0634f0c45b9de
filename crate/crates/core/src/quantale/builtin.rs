//! Built-in quantale families, addressable by name (`"lukasiewicz:5"`, `"godel:4"`,
//! `"boolean:2"`, `"heyting:chain:3"`, `"heyting:antichain:2"`).

use num_rational::Ratio;

use super::{Quantale, QuantaleError, MAX_CARRIER};

fn chain_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            let r = Ratio::new(k as u32, (n - 1) as u32);
            if *r.denom() == 1 {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        })
        .collect()
}

fn chain_order(n: usize) -> Vec<bool> {
    (0..n).flat_map(|x| (0..n).map(move |y| x <= y)).collect()
}

fn check_chain_len(family: &str, n: usize) -> Result<(), QuantaleError> {
    if n < 2 {
        return Err(QuantaleError::BadParameter {
            name: family.into(),
            detail: format!("chain length must be at least 2, got {n}"),
        });
    }
    if n > MAX_CARRIER {
        return Err(QuantaleError::CarrierTooLarge(n));
    }
    Ok(())
}

/// The chain `{0, 1/(n-1), ..., 1}` with the Łukasiewicz t-norm `max(x + y - 1, 0)`.
///
/// Values are exact multiples of `1/(n-1)`, so the product of indices `i` and `j`
/// is the index `max(i + j - (n-1), 0)`.
pub fn lukasiewicz_chain(n: usize) -> Result<Quantale, QuantaleError> {
    check_chain_len("lukasiewicz", n)?;
    let top = n - 1;
    let product = (0..n)
        .map(|i| (0..n).map(|j| (i + j).saturating_sub(top)).collect())
        .collect();
    Quantale::build_from_tables(
        format!("lukasiewicz:{n}"),
        chain_labels(n),
        chain_order(n),
        product,
        0,
        top,
    )
}

/// The chain `{0, 1/(n-1), ..., 1}` with the Gödel t-norm `min(x, y)`.
pub fn godel_chain(n: usize) -> Result<Quantale, QuantaleError> {
    check_chain_len("godel", n)?;
    let product = (0..n).map(|i| (0..n).map(|j| i.min(j)).collect()).collect();
    Quantale::build_from_tables(
        format!("godel:{n}"),
        chain_labels(n),
        chain_order(n),
        product,
        0,
        n - 1,
    )
}

/// The powerset of `k` atoms, product = intersection.
pub fn boolean_algebra(k: usize) -> Result<Quantale, QuantaleError> {
    if k == 0 || k > 8 {
        return Err(QuantaleError::BadParameter {
            name: "boolean".into(),
            detail: format!("number of atoms must be in 1..=8, got {k}"),
        });
    }
    let n = 1usize << k;
    let full = n - 1;
    let labels = (0..n)
        .map(|mask| match mask {
            0 => "0".to_string(),
            m if m == full => "1".to_string(),
            m => (0..k)
                .filter(|b| m & (1 << b) != 0)
                .map(|b| (b'a' + b as u8) as char)
                .collect(),
        })
        .collect();
    let leq = (0..n).flat_map(|x| (0..n).map(move |y| x & y == x)).collect();
    let product = (0..n).map(|x| (0..n).map(|y| x & y).collect()).collect();
    Quantale::build_from_tables(format!("boolean:{k}"), labels, leq, product, 0, full)
}

/// A finite partial order, given by its `<=` relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    size: usize,
    leq: Vec<bool>,
}

impl Poset {
    pub fn new(size: usize, leq: Vec<bool>) -> Result<Self, QuantaleError> {
        if leq.len() != size * size {
            return Err(QuantaleError::InvalidPoset(format!(
                "relation has {} entries, expected {}",
                leq.len(),
                size * size
            )));
        }
        if size > 16 {
            return Err(QuantaleError::InvalidPoset(format!("{size} points is too many")));
        }
        let le = |a: usize, b: usize| leq[a * size + b];
        for a in 0..size {
            if !le(a, a) {
                return Err(QuantaleError::InvalidPoset(format!("not reflexive at {a}")));
            }
            for b in 0..size {
                if a != b && le(a, b) && le(b, a) {
                    return Err(QuantaleError::InvalidPoset(format!(
                        "not antisymmetric at ({a}, {b})"
                    )));
                }
                for c in 0..size {
                    if le(a, b) && le(b, c) && !le(a, c) {
                        return Err(QuantaleError::InvalidPoset(format!(
                            "not transitive at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Poset { size, leq })
    }

    pub fn chain(size: usize) -> Self {
        Poset { size, leq: chain_order(size) }
    }

    pub fn antichain(size: usize) -> Self {
        Poset {
            size,
            leq: (0..size).flat_map(|a| (0..size).map(move |b| a == b)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.size + b]
    }

    /// All down-closed subsets, as bitmasks, in increasing numeric order.
    pub fn down_sets(&self) -> Vec<u32> {
        (0u32..(1u32 << self.size))
            .filter(|&mask| {
                (0..self.size).all(|b| {
                    mask & (1 << b) == 0 || (0..self.size).all(|a| !self.leq(a, b) || mask & (1 << a) != 0)
                })
            })
            .collect()
    }
}

/// The Heyting algebra of down-sets of `poset`, ordered by inclusion, product = intersection.
pub fn heyting_from_poset(name: impl Into<String>, poset: &Poset) -> Result<Quantale, QuantaleError> {
    let sets = poset.down_sets();
    let n = sets.len();
    if n > MAX_CARRIER {
        return Err(QuantaleError::CarrierTooLarge(n));
    }
    let full = (1u32 << poset.size()) - 1;
    let labels = sets
        .iter()
        .map(|&s| match s {
            0 => "0".to_string(),
            s if s == full => "1".to_string(),
            s => {
                let members: Vec<String> = (0..poset.size())
                    .filter(|b| s & (1 << b) != 0)
                    .map(|b| b.to_string())
                    .collect();
                format!("{{{}}}", members.join(","))
            }
        })
        .collect();
    let index_of = |s: u32| sets.iter().position(|&t| t == s).expect("down-sets are closed under intersection");
    let leq = sets
        .iter()
        .flat_map(|&a| sets.iter().map(move |&b| a & b == a))
        .collect();
    let product = sets
        .iter()
        .map(|&a| sets.iter().map(|&b| index_of(a & b)).collect())
        .collect();
    Quantale::build_from_tables(name, labels, leq, product, index_of(0), index_of(full))
}

/// Resolves a built-in quantale by its name string.
pub fn builtin(name: &str) -> Result<Quantale, QuantaleError> {
    let parts: Vec<&str> = name.split(':').collect();
    let number = |s: &str| {
        s.parse::<usize>().map_err(|_| QuantaleError::BadParameter {
            name: name.into(),
            detail: format!("`{s}` is not a natural number"),
        })
    };
    match parts.as_slice() {
        ["lukasiewicz", n] => lukasiewicz_chain(number(n)?),
        ["godel", n] => godel_chain(number(n)?),
        ["boolean", k] => boolean_algebra(number(k)?),
        ["heyting", "chain", n] => heyting_from_poset(name, &Poset::chain(number(n)?)),
        ["heyting", "antichain", n] => heyting_from_poset(name, &Poset::antichain(number(n)?)),
        _ => Err(QuantaleError::UnknownBuiltin(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::QElem;

    /// sup{z : x*z <= y}, recomputed from the product and order alone.
    fn residuum_oracle(q: &Quantale, x: QElem, y: QElem) -> QElem {
        q.sup(q.elements().filter(|&z| q.leq(q.product(x, z), y)))
    }

    fn at(q: &Quantale, label: &str) -> QElem {
        q.by_label(label).unwrap_or_else(|| panic!("no label {label}"))
    }

    #[test]
    fn lukasiewicz_two_is_boolean() {
        let q = lukasiewicz_chain(2).unwrap();
        assert_eq!(q.labels(), ["0", "1"]);
        assert_eq!(q.product(q.top(), q.top()), q.top());
        assert_eq!(q.product(q.top(), q.bottom()), q.bottom());
        assert_eq!(q.neg(q.bottom()), q.top());
        assert_eq!(q.neg(q.top()), q.bottom());
    }

    #[test]
    fn lukasiewicz_three_values() {
        let q = lukasiewicz_chain(3).unwrap();
        let half = at(&q, "1/2");
        assert_eq!(q.product(half, half), q.bottom());
        assert_eq!(q.residuum(half, q.bottom()), half);
        assert_eq!(residuum_oracle(&q, half, q.bottom()), half);
        assert_eq!(q.neg(half), half);
        assert_eq!(q.join(half, q.neg(half)), half);
        assert!(!q.is_idempotent());
    }

    #[test]
    fn lukasiewicz_five_values() {
        let q = lukasiewicz_chain(5).unwrap();
        let (h, tq) = (at(&q, "1/2"), at(&q, "3/4"));
        assert_eq!(q.residuum(tq, h), tq);
        assert_eq!(residuum_oracle(&q, tq, h), tq);
        assert_eq!(q.product(tq, tq), h);
    }

    #[test]
    fn residuum_edge_rows() {
        for name in ["lukasiewicz:5", "godel:4", "boolean:2", "heyting:chain:3"] {
            let q = builtin(name).unwrap();
            for y in q.elements() {
                assert_eq!(q.residuum(q.bottom(), y), q.top(), "{name}");
                assert_eq!(q.residuum(q.top(), y), y, "{name}");
            }
        }
    }

    #[test]
    fn chain_length_below_two_is_rejected() {
        assert!(matches!(lukasiewicz_chain(1), Err(QuantaleError::BadParameter { .. })));
        assert!(matches!(godel_chain(0), Err(QuantaleError::BadParameter { .. })));
    }

    #[test]
    fn godel_is_idempotent() {
        let q = godel_chain(3).unwrap();
        let half = at(&q, "1/2");
        assert_eq!(q.product(half, half), half);
        assert!(q.is_idempotent());
    }

    #[test]
    fn boolean_two_atoms() {
        let q = boolean_algebra(2).unwrap();
        assert_eq!(q.size(), 4);
        assert_eq!(q.join(at(&q, "a"), at(&q, "b")), q.top());
        assert_eq!(q.neg(at(&q, "a")), at(&q, "b"));
    }

    #[test]
    fn heyting_antichain_is_boolean_shaped() {
        let q = heyting_from_poset("h", &Poset::antichain(2)).unwrap();
        assert_eq!(q.size(), 4);
        for x in q.elements() {
            assert_eq!(q.join(x, q.neg(x)), q.top());
            assert_eq!(q.neg(q.neg(x)), x);
        }
    }

    #[test]
    fn heyting_chain_three_is_four_chain_with_non_involutive_middle() {
        let q = builtin("heyting:chain:3").unwrap();
        assert_eq!(q.size(), 4);
        // down-set oracle: {}, {0}, {0,1}, {0,1,2}
        assert_eq!(q.labels(), ["0", "{0}", "{0,1}", "1"]);
        for x in q.elements() {
            if x != q.bottom() && x != q.top() {
                assert_eq!(q.neg(q.neg(x)), q.top());
                assert_ne!(q.neg(q.neg(x)), x);
            }
        }
    }

    #[test]
    fn invalid_poset_is_rejected() {
        let err = Poset::new(2, vec![true, true, true, true]).unwrap_err();
        assert!(matches!(err, QuantaleError::InvalidPoset(_)));
        let err = Poset::new(2, vec![false, false, false, true]).unwrap_err();
        assert!(matches!(err, QuantaleError::InvalidPoset(_)));
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(builtin("product:3"), Err(QuantaleError::UnknownBuiltin("product:3".into())));
        assert!(matches!(builtin("godel:x"), Err(QuantaleError::BadParameter { .. })));
    }
}
