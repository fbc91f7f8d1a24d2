//! Lexicographic k-subset enumeration over `0..m`.

/// Iterator over the `k`-subsets of `0..m` in lexicographic order of the
/// sorted member list.
#[derive(Clone, Debug)]
pub struct Combinations {
    m: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(m: usize, k: usize) -> Self {
        Combinations { m, current: (0..k).collect(), done: k > m }
    }

    /// Subsets whose smallest member is `first`, still in lexicographic order.
    pub fn with_first(m: usize, k: usize, first: usize) -> impl Iterator<Item = Vec<usize>> {
        let rest = if k == 0 || first + k > m {
            Combinations { m: 0, current: Vec::new(), done: true }
        } else {
            Combinations::new(m - first - 1, k - 1)
        };
        let valid = k > 0 && first + k <= m;
        rest.filter(move |_| valid).map(move |tail| {
            let mut c = Vec::with_capacity(k);
            c.push(first);
            c.extend(tail.into_iter().map(|x| x + first + 1));
            c
        })
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        // advance to the next subset
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.m - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            self.done = true;
        }
        Some(out)
    }
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_in_lexicographic_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn partition_by_first_member_covers_everything() {
        let (m, k) = (7, 3);
        let joined: Vec<_> = (0..m).flat_map(|f| Combinations::with_first(m, k, f)).collect();
        let direct: Vec<_> = Combinations::new(m, k).collect();
        assert_eq!(joined, direct);
        assert_eq!(direct.len() as u64, binomial(m, k));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }
}
