use serde::Serialize;

use super::OnticExtension;
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Largest ontic space accepted by the exhaustive bijection search.
pub const MAX_BIJECTION_LAMBDA: usize = 8;

/// A one-to-one map between ontic spaces, `map[i] = f(lambda_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bijection {
    pub map: Vec<usize>,
    /// `(lambda, f(lambda))` label pairs.
    pub pairs: Vec<(String, String)>,
}

impl Bijection {
    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }
}

// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn index_map(from: &crate::opmodel::Alphabet, to: &crate::opmodel::Alphabet, role: &str) -> Result<Vec<usize>> {
    if from.len() != to.len() {
        return Err(Error::AlphabetMismatch(format!("{role}: {from} vs {to}")));
    }
    from.labels()
        .iter()
        .map(|l| {
            to.index_of(l)
                .ok_or_else(|| Error::AlphabetMismatch(format!("{role}: {from} vs {to}")))
        })
        .collect()
}

/// Search for `f` with `p'(b, a, f(lambda) | y, x) = p(a, b, lambda | x, y)`.
///
/// `rev` must have preparation alphabets equal to the measurement alphabets
/// of `ext` and vice versa (matched by label). Bijections are tried in
/// lexicographic order starting from the identity.
pub fn find_ontological_time_reverse<P: Field>(
    ext: &OnticExtension<P>,
    rev: &OnticExtension<P>,
    eps: f64,
) -> Result<Option<Bijection>> {
    let n = ext.lambda().len();
    let guard = MAX_BIJECTION_LAMBDA;
    if n.max(rev.lambda().len()) > guard {
        let fact = |k: usize| (1..=k as u128).product::<u128>();
        return Err(Error::GuardExceeded(fact(n.max(rev.lambda().len())), fact(guard)));
    }
    let s = ext.scenario();
    let r = rev.scenario();
    // rev's x is ext's y, rev's a is ext's b, ...
    let my = index_map(&s.y, &r.x, "reverse preparation inputs")?;
    let mb = index_map(&s.b, &r.a, "reverse preparation outputs")?;
    let mx = index_map(&s.x, &r.y, "reverse measurement inputs")?;
    let ma = index_map(&s.a, &r.b, "reverse measurement outputs")?;
    if rev.lambda().len() != n {
        return Ok(None);
    }
    let cells: Vec<(usize, usize, usize, usize)> = s.tuples().collect();
    let matches = |f: &[usize]| {
        cells.iter().all(|&(x, a, y, b)| {
            (0..n).all(|l| {
                let lhs = rev.get(my[y], mb[b], mx[x], ma[a], f[l]).clone();
                (lhs - ext.get(x, a, y, b, l).clone()).within(eps)
            })
        })
    };
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if matches(&perm) {
            let pairs = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (ext.lambda().label(i).to_string(), rev.lambda().label(j).to_string()))
                .collect();
            return Ok(Some(Bijection { map: perm, pairs }));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::next_permutation;

    #[test]
    fn permutations_are_exhaustive_and_ordered() {
        let mut p = vec![0, 1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            assert!(p > *seen.last().unwrap());
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 24);
        assert_eq!(seen.last().unwrap(), &vec![3, 2, 1, 0]);
    }
}
