//! Mapping tori `X` and `X_L` as cell complexes, and normal forms `u·tⁿ` for
//! elements of `G = F ⋊_Φ ℤ` when the graph is a rose.
//!
//! Group multiplication follows `t·f·t⁻¹ = Φ(f)`. The 2-cell `R_e` has
//! boundary `t_a⁻¹·e·t_b·φ(e)⁻¹`, so the horizontal cell `t_a` represents
//! `t⁻¹`. Heights in the universal cover therefore increase when `n`
//! decreases; [`label_of`] makes the correspondence explicit.

use crate::graph::Dir;
use crate::graph::{inv, GraphMap};
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// One letter of a 2-cell boundary word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellLetter {
    /// Vertical 1-cell (an oriented edge of the graph).
    Vertical(Dir),
    /// Horizontal 1-cell `t_v` at vertex `v`, forward or backward.
    Horizontal {
        /// The 0-cell the horizontal cell starts at.
        vertex: usize,
        /// True for `t_v`, false for `t_v⁻¹`.
        forward: bool,
    },
}

/// The mapping torus of `φ^L` as a 2-complex.
#[derive(Clone, Debug)]
pub struct MappingTorusComplex {
    /// Exponent `L` the complex was built for.
    pub power: usize,
    /// Number of 0-cells (= graph vertices).
    pub zero_cells: usize,
    /// Number of vertical 1-cells (= graph edges).
    pub vertical_cells: usize,
    /// Number of horizontal 1-cells (one per 0-cell).
    pub horizontal_cells: usize,
    /// Boundary word of `R_e`, indexed by positive edge rank.
    pub two_cells: Vec<Vec<CellLetter>>,
}

impl MappingTorusComplex {
    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.zero_cells as i64 - (self.vertical_cells + self.horizontal_cells) as i64 + self.two_cells.len() as i64
    }

    /// Checks that every boundary word is a closed path in the 1-skeleton,
    /// given the endpoints of vertical cells.
    pub fn boundaries_closed(&self, phi: &GraphMap) -> bool {
        let g = phi.graph();
        let vm: Vec<usize> = match phi.power(self.power) {
            Ok(p) => (0..g.vertex_count()).map(|v| p.vertex_image(v)).collect(),
            Err(_) => return false,
        };
        self.two_cells.iter().all(|word| {
            let mut at = match word.first() {
                Some(CellLetter::Horizontal { vertex, forward: false }) => vm[*vertex],
                _ => return false,
            };
            for l in word {
                at = match *l {
                    CellLetter::Vertical(d) if g.src(d) == at => g.dst(d),
                    CellLetter::Horizontal { vertex, forward: true } if vertex == at => vm[vertex],
                    CellLetter::Horizontal { vertex, forward: false } if vm[vertex] == at => vertex,
                    _ => return false,
                };
            }
            at == vm[match word.first() {
                Some(CellLetter::Horizontal { vertex, .. }) => *vertex,
                _ => return false,
            }]
        })
    }

    /// Renders a boundary word, e.g. `t_v⁻¹ b t_v A B`.
    pub fn render(&self, phi: &GraphMap, k: usize) -> String {
        let g = phi.graph();
        let parts: Vec<String> = self.two_cells[k]
            .iter()
            .map(|l| match *l {
                CellLetter::Vertical(d) => String::from(g.name(d)),
                CellLetter::Horizontal { vertex, forward } => {
                    format!("t_{}{}", g.vertex_names()[vertex], if forward { "" } else { "^-1" })
                }
            })
            .collect();
        parts.join(" ")
    }
}

/// The mapping torus `X` of `φ`.
pub fn build_torus(phi: &GraphMap) -> MappingTorusComplex {
    build_torus_l(phi, 1).expect("L = 1 is valid")
}

/// The mapping torus `X_L` of `φ^L`, with `φ^L` edge images substituted
/// without reduction.
pub fn build_torus_l(phi: &GraphMap, l: usize) -> Result<MappingTorusComplex> {
    if l == 0 {
        return Err(Error::Structural("mapping torus power must be at least 1".into()));
    }
    let p = phi.power(l)?;
    let g = p.graph();
    let two_cells = (0..g.edge_count())
        .map(|k| {
            let e = 2 * k;
            let mut w = Vec::with_capacity(p.image(e).len() + 3);
            w.push(CellLetter::Horizontal {
                vertex: g.src(e),
                forward: false,
            });
            w.push(CellLetter::Vertical(e));
            w.push(CellLetter::Horizontal {
                vertex: g.dst(e),
                forward: true,
            });
            w.extend(p.image(e).iter().rev().map(|&d| CellLetter::Vertical(inv(d))));
            w
        })
        .collect();
    Ok(MappingTorusComplex {
        power: l,
        zero_cells: g.vertex_count(),
        vertical_cells: g.edge_count(),
        horizontal_cells: g.vertex_count(),
        two_cells,
    })
}

/// `u·tⁿ` with `u` a reduced word in the rose's edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    /// Reduced free part.
    pub u: Vec<Dir>,
    /// Exponent of `t`.
    pub n: i64,
}

impl GroupElement {
    /// The identity.
    pub fn identity() -> GroupElement {
        GroupElement { u: Vec::new(), n: 0 }
    }
}

fn require_rose(phi: &GraphMap) -> Result<()> {
    if phi.graph().is_rose() {
        Ok(())
    } else {
        Err(Error::Structural(
            "normal forms need a rose (edges as free generators)".into(),
        ))
    }
}

/// `Φᵏ(w)` reduced, for any integer `k` (negative powers need the inverse).
pub fn phi_power(phi: &GraphMap, w: &[Dir], k: i64) -> Result<Vec<Dir>> {
    let mut cur = crate::graph::reduce(w);
    if k >= 0 {
        for _ in 0..k {
            cur = phi.tight_image(&cur);
        }
    } else {
        for _ in 0..(-k) {
            cur = phi.tight_inverse_image(&cur)?;
        }
    }
    Ok(cur)
}

/// `(u₁, n₁)·(u₂, n₂) = (u₁·Φ^{n₁}(u₂), n₁ + n₂)`.
pub fn multiply(phi: &GraphMap, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    require_rose(phi)?;
    let mut u = a.u.clone();
    crate::graph::reduce_onto(&mut u, &phi_power(phi, &b.u, a.n)?);
    Ok(GroupElement { u, n: a.n + b.n })
}

/// `(u, n)⁻¹ = (Φ^{−n}(u⁻¹), −n)`.
pub fn invert(phi: &GraphMap, a: &GroupElement) -> Result<GroupElement> {
    require_rose(phi)?;
    let uinv: Vec<Dir> = a.u.iter().rev().map(|&d| inv(d)).collect();
    Ok(GroupElement {
        u: phi_power(phi, &uinv, -a.n)?,
        n: -a.n,
    })
}

/// Parses a word over the generators and `t` into normal form. Accepted
/// `t` tokens: `t`, `T`, `t⁻¹` and `t^k` for any integer `k`, so the output
/// of [`render`] parses back. Whitespace is ignored. An edge named `t` would
/// be ambiguous and is rejected.
pub fn normal_form(phi: &GraphMap, word: &str) -> Result<GroupElement> {
    require_rose(phi)?;
    let g = phi.graph();
    if g.dir("t").is_ok() {
        return Err(Error::Structural(
            "an edge named t clashes with the stable letter".into(),
        ));
    }
    let cleaned = word.replace("t⁻¹", "T");
    let mut acc = GroupElement::identity();
    let mut pending = String::new();
    let flush = |pending: &mut String, acc: &mut GroupElement| -> Result<()> {
        if !pending.is_empty() {
            let dirs = g.parse_word(pending)?;
            pending.clear();
            *acc = multiply(phi, acc, &GroupElement { u: dirs, n: 0 })?;
        }
        Ok(())
    };
    let mut chars = cleaned.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            't' | 'T' => {
                flush(&mut pending, &mut acc)?;
                let mut k: i64 = if c == 't' { 1 } else { -1 };
                if c == 't' && chars.peek() == Some(&'^') {
                    chars.next();
                    let mut digits = String::new();
                    if let Some(&sign) = chars.peek().filter(|&&d| d == '-' || d == '+') {
                        digits.push(sign);
                        chars.next();
                    }
                    while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                        digits.push(d);
                        chars.next();
                    }
                    k = digits
                        .parse()
                        .map_err(|_| Error::Structural(format!("bad exponent after t in {word:?}")))?;
                }
                acc.n = acc.n.checked_add(k).ok_or(Error::Overflow)?;
            }
            c if c.is_whitespace() => flush(&mut pending, &mut acc)?,
            c => pending.push(c),
        }
    }
    flush(&mut pending, &mut acc)?;
    Ok(acc)
}

/// Renders `u·tⁿ` as e.g. `aab t^1`.
pub fn render(phi: &GraphMap, a: &GroupElement) -> String {
    let u = phi.graph().word(&a.u);
    let u = if u.is_empty() { String::from("1") } else { u };
    format!("{u} t^{}", a.n)
}

/// Universal-cover label `(height, word)` of a group element: the height is
/// `−n` and the word is `Φ^{−n}(u)`.
pub fn label_of(phi: &GraphMap, a: &GroupElement) -> Result<(i64, Vec<Dir>)> {
    require_rose(phi)?;
    Ok((-a.n, phi_power(phi, &a.u, -a.n)?))
}

/// Inverse of [`label_of`].
pub fn element_of(phi: &GraphMap, height: i64, word: &[Dir]) -> Result<GroupElement> {
    require_rose(phi)?;
    Ok(GroupElement {
        u: phi_power(phi, word, -height)?,
        n: -height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> GraphMap {
        GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")])
            .unwrap()
            .with_inverse_words(&[("a", "bA"), ("b", "a")])
            .unwrap()
    }

    #[test]
    fn cell_counts() {
        let phi = ex2();
        let x = build_torus(&phi);
        assert_eq!(
            (x.zero_cells, x.vertical_cells, x.horizontal_cells, x.two_cells.len()),
            (1, 2, 1, 2)
        );
        assert_eq!(x.euler_characteristic(), 0);
        assert!(x.boundaries_closed(&phi));
        let ex1 = GraphMap::rose_from_words(&[("a", "a"), ("b", "ba")]).unwrap();
        assert_eq!(build_torus(&ex1).render(&ex1, 1), "t_v^-1 b t_v A B");
        let x2 = build_torus_l(&phi, 2).unwrap();
        assert_eq!(x2.render(&phi, 0), "t_v^-1 a t_v B A");
        assert!(build_torus_l(&phi, 0).is_err());
    }

    #[test]
    fn normal_forms() {
        let phi = ex2();
        let g = phi.graph();
        let x = normal_form(&phi, "a t b").unwrap();
        assert_eq!((g.word(&x.u), x.n), ("aab".into(), 1));
        let y = normal_form(&phi, "t T a").unwrap();
        assert_eq!((g.word(&y.u), y.n), ("a".into(), 0));
        let z = normal_form(&phi, "t a t^-1").unwrap();
        assert_eq!((g.word(&z.u), z.n), ("b".into(), 0));
        let w = normal_form(&phi, "bA t^-2 a t^3").unwrap();
        assert_eq!(normal_form(&phi, &render(&phi, &w)).unwrap(), w);
        assert_eq!(normal_form(&phi, "t^+2 T T").unwrap(), GroupElement::identity());
        assert!(normal_form(&phi, "t^x").is_err());
        let no_inv = GraphMap::rose_from_words(&[("a", "b"), ("b", "ab")]).unwrap();
        assert!(matches!(normal_form(&no_inv, "T a"), Err(Error::InverseRequired(_))));
    }

    #[test]
    fn labels_round_trip() {
        let phi = ex2();
        let x = normal_form(&phi, "ab T T b").unwrap();
        let (h, w) = label_of(&phi, &x).unwrap();
        assert_eq!(h, 2);
        assert_eq!(element_of(&phi, h, &w).unwrap(), x);
    }
}
