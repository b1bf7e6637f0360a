use std::fmt;
use std::str::FromStr;

/// A permutation of `{1, ..., n}` stored by its images `σ(1), ..., σ(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("not a permutation of 1..={n}: {images:?}")]
    NotBijective { n: usize, images: Vec<usize> },
    #[error("cannot parse permutation {0:?}")]
    Parse(String),
}

impl Permutation {
    /// From one-line image notation, 1-based.
    pub fn new(images: Vec<usize>) -> Result<Self, PermutationError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &i in &images {
            if i == 0 || i > n || seen[i] {
                return Err(PermutationError::NotBijective { n, images });
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// `σ(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &img) in self.images.iter().enumerate() {
            inv[img - 1] = i + 1;
        }
        Self { images: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n());
        Self {
            images: other.images.iter().map(|&i| self.images[i - 1]).collect(),
        }
    }

    /// All `n!` permutations in lexicographic order of their images.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Self {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    /// Coordinate positions (0-based) from outermost to innermost summation
    /// for `Σ_{j_1} Σ_{j_2} ... b(j_σ(1), ..., j_σ(n))`: variable `j_i` sits
    /// at position `σ^{-1}(i)`.
    pub fn summation_order(&self) -> Vec<usize> {
        self.inverse().images.iter().map(|&p| p - 1).collect()
    }

    /// Inverse of [`Permutation::summation_order`].
    pub fn from_summation_order(order: &[usize]) -> Result<Self, PermutationError> {
        Ok(Self::new(order.iter().map(|&p| p + 1).collect())?.inverse())
    }

    /// Summation order for `∫...∫ f dx_σ(1) ... dx_σ(n)`: `x_σ(1)` innermost.
    pub fn integration_order(&self) -> Vec<usize> {
        self.images.iter().rev().map(|&p| p - 1).collect()
    }

    /// Cycle notation on one line, fixed points included, e.g. `(1 2)(3)`.
    pub fn cycle_notation(&self) -> String {
        let mut seen = vec![false; self.n() + 1];
        let mut out = String::new();
        for start in 1..=self.n() {
            if seen[start] {
                continue;
            }
            out.push('(');
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    out.push(' ');
                }
                out.push_str(&i.to_string());
                first = false;
                i = self.apply(i);
            }
            out.push(')');
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for Permutation {
    type Err = PermutationError;

    /// One-line image notation: `"2 1 3"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let images = s
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PermutationError::Parse(s.to_string()))?;
        if images.is_empty() {
            return Err(PermutationError::Parse(s.to_string()));
        }
        Self::new(images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumerates_symmetric_group() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], Permutation::identity(3));
        assert_eq!(all[1].images(), &[1, 3, 2]);
        assert_eq!(all[5].images(), &[3, 2, 1]);
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::all(1).len(), 1);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!("1 x".parse::<Permutation>().is_err());
        assert_eq!("2 1 3".parse::<Permutation>().unwrap().images(), &[2, 1, 3]);
    }

    #[test]
    fn orders_for_two_dimensions() {
        let id = Permutation::identity(2);
        let swap: Permutation = "2 1".parse().unwrap();
        // rows outermost for σ = id, columns outermost for the swap
        assert_eq!(id.summation_order(), vec![0, 1]);
        assert_eq!(swap.summation_order(), vec![1, 0]);
        // ∫∫ f dx dy has x innermost, so y (position 1) is outermost
        assert_eq!(id.integration_order(), vec![1, 0]);
    }

    #[test]
    fn summation_order_for_three() {
        // σ = (2,1,3): j_1 at position 2, j_2 at position 1, j_3 at position 3
        let s: Permutation = "2 1 3".parse().unwrap();
        assert_eq!(s.summation_order(), vec![1, 0, 2]);
        let s: Permutation = "3 1 2".parse().unwrap();
        assert_eq!(s.summation_order(), vec![1, 2, 0]);
    }

    #[test]
    fn cycle_notation() {
        assert_eq!(Permutation::identity(3).cycle_notation(), "(1)(2)(3)");
        assert_eq!("2 1 3".parse::<Permutation>().unwrap().cycle_notation(), "(1 2)(3)");
        assert_eq!("2 3 1".parse::<Permutation>().unwrap().cycle_notation(), "(1 2 3)");
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..7).prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle()).prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_and_composition_round_trip(p in perm_strategy()) {
            let id = Permutation::identity(p.n());
            prop_assert_eq!(p.compose(&p.inverse()), id.clone());
            prop_assert_eq!(p.inverse().compose(&p), id);
            prop_assert_eq!(p.inverse().inverse(), p.clone());
            let order = p.summation_order();
            prop_assert_eq!(Permutation::from_summation_order(&order).unwrap(), p);
        }
    }
}
