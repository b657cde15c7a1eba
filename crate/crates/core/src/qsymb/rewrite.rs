//! Word rewriting with the defining relations.
//!
//! This is deliberately independent of the closed-form product in the parent
//! module so the two can be checked against each other.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Letter, QMonomial, QPolynomial};
use crate::laurent::LaurentScalar;

/// A scalar multiple of a product of generator letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub coeff: LaurentScalar,
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self {
            coeff: LaurentScalar::one(),
            letters,
        }
    }

    pub fn with_coeff(coeff: LaurentScalar, letters: Vec<Letter>) -> Self {
        Self { coeff, letters }
    }
}

/// Which redex to contract when a word has several.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    Leftmost,
    Rightmost,
    /// Uniformly random redex, reproducible from the seed.
    Random(u64),
}

type Rhs = Vec<(LaurentScalar, Vec<Letter>)>;

/// Right-hand side of the rule for an adjacent pair, if the pair is a redex.
fn rule(x: Letter, y: Letter) -> Option<Rhs> {
    use Letter::{AStar as Ast, BStar as Bst, A, B};
    let q = LaurentScalar::q_pow;
    Some(match (x, y) {
        (B, A) => vec![(q(1), vec![A, B])],
        (Bst, A) => vec![(q(1), vec![A, Bst])],
        (B, Ast) => vec![(q(-1), vec![Ast, B])],
        (Bst, Ast) => vec![(q(-1), vec![Ast, Bst])],
        (Bst, B) => vec![(LaurentScalar::one(), vec![B, Bst])],
        (Ast, A) => vec![(LaurentScalar::one(), vec![]), (-q(2), vec![B, Bst])],
        (A, Ast) => vec![
            (LaurentScalar::one(), vec![]),
            (-LaurentScalar::one(), vec![B, Bst]),
        ],
        _ => return None,
    })
}

fn redexes(letters: &[Letter]) -> Vec<usize> {
    (0..letters.len().saturating_sub(1))
        .filter(|&i| rule(letters[i], letters[i + 1]).is_some())
        .collect()
}

/// A redex-free word is `(a|a*)^i b^j (b*)^k`.
fn to_monomial(letters: &[Letter]) -> QMonomial {
    let mut starred = false;
    let (mut i, mut j, mut k) = (0, 0, 0);
    for l in letters {
        match l {
            Letter::A => i += 1,
            Letter::AStar => {
                i += 1;
                starred = true;
            }
            Letter::B => j += 1,
            Letter::BStar => k += 1,
        }
    }
    if starred {
        QMonomial::starred(i, j, k)
    } else {
        QMonomial::new(i, j, k)
    }
}

/// Reduces a word to normal form, contracting leftmost redexes first.
pub fn normal_form(word: &Word) -> QPolynomial {
    normal_form_with(word, RewriteStrategy::Leftmost)
}

/// Reduces a word to normal form with a chosen redex strategy.
pub fn normal_form_with(word: &Word, strategy: RewriteStrategy) -> QPolynomial {
    let mut rng = match strategy {
        RewriteStrategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut pending: BTreeMap<Vec<Letter>, LaurentScalar> = BTreeMap::new();
    pending.insert(word.letters.clone(), word.coeff.clone());
    let mut out = QPolynomial::zero();

    while let Some((letters, coeff)) = pending.pop_first() {
        if coeff.is_zero() {
            continue;
        }
        let spots = redexes(&letters);
        if spots.is_empty() {
            out.add_term(to_monomial(&letters), &coeff);
            continue;
        }
        let pos = match strategy {
            RewriteStrategy::Leftmost => spots[0],
            RewriteStrategy::Rightmost => spots[spots.len() - 1],
            RewriteStrategy::Random(_) => {
                let rng = rng.as_mut().expect("seeded above");
                spots[rng.random_range(0..spots.len())]
            }
        };
        let rhs = rule(letters[pos], letters[pos + 1]).expect("position is a redex");
        for (c, middle) in rhs {
            let mut next = Vec::with_capacity(letters.len());
            next.extend_from_slice(&letters[..pos]);
            next.extend(middle);
            next.extend_from_slice(&letters[pos + 2..]);
            let entry = pending.entry(next).or_default();
            *entry += &(&coeff * &c);
        }
    }
    out
}
