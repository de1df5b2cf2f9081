//! Arithmetic and Gaussian elimination over the prime field `Z_b`.

#[inline]
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    // Fermat: a^(p-2)
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u32);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Incrementally maintained row-echelon basis; `insert` reports whether the
/// new row was linearly independent of the rows inserted so far.
#[derive(Clone, Debug)]
pub(crate) struct EchelonBasis {
    p: u32,
    width: usize,
    // (pivot column, normalized row with 1 at pivot)
    rows: Vec<(usize, Vec<u32>)>,
}

impl EchelonBasis {
    pub(crate) fn new(p: u32, width: usize) -> Self {
        Self {
            p,
            width,
            rows: Vec::new(),
        }
    }

    pub(crate) fn insert(&mut self, row: &[u8]) -> bool {
        debug_assert_eq!(row.len(), self.width);
        let p = self.p;
        let mut v: Vec<u32> = row.iter().map(|&x| x as u32 % p).collect();
        for (pivot, basis) in &self.rows {
            let c = v[*pivot];
            if c != 0 {
                for (vi, bi) in v.iter_mut().zip(basis) {
                    *vi = (*vi + (p - c) * bi) % p;
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(pivot) => {
                let inv = inv_mod(v[pivot], p);
                for x in v.iter_mut() {
                    *x = *x * inv % p;
                }
                self.rows.push((pivot, v));
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(rows: &[&[u8]], p: u32, width: usize) -> usize {
        let mut basis = EchelonBasis::new(p, width);
        rows.iter().filter(|r| basis.insert(r)).count()
    }

    #[test]
    fn inverses() {
        for p in [2u32, 3, 5, 7, 11, 251] {
            for a in 1..p {
                assert_eq!(a * inv_mod(a, p) % p, 1);
            }
        }
    }

    #[test]
    fn rank_over_small_fields() {
        let a: [u8; 3] = [1, 1, 0];
        let b: [u8; 3] = [0, 1, 1];
        let c: [u8; 3] = [1, 0, 1];
        // over Z_2, a + b = c
        assert_eq!(rank(&[&a, &b, &c], 2, 3), 2);
        // over Z_3 they are independent
        assert_eq!(rank(&[&a, &b, &c], 3, 3), 3);
        assert_eq!(rank(&[&[0u8, 0, 0][..]], 5, 3), 0);
    }
}
