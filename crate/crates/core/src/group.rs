//! Finite groups given by multiplication tables.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table must be square and nonempty")]
    InvalidShape,
    #[error("table entry {value} at ({g}, {h}) is out of range")]
    EntryOutOfRange { g: usize, h: usize, value: usize },
    #[error("not associative: ({g}·{h})·{k} ≠ {g}·({h}·{k})")]
    NotAssociative { g: usize, h: usize, k: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("row {0} of the table is not a permutation")]
    NotAPermutationRow(usize),
}

/// A finite group: order, full multiplication table, identity and inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        validate_group(table).expect("cyclic table is a group")
    }

    /// Direct product; elements indexed as `g1 * |G2| + g2`.
    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let n = a.order * b.order;
        let idx = |g1: usize, g2: usize| g1 * b.order + g2;
        let mut table = vec![vec![0usize; n]; n];
        for g1 in 0..a.order {
            for g2 in 0..b.order {
                for h1 in 0..a.order {
                    for h2 in 0..b.order {
                        table[idx(g1, g2)][idx(h1, h2)] = idx(a.mul(g1, h1), b.mul(g2, h2));
                    }
                }
            }
        }
        validate_group(table).expect("product table is a group")
    }

    /// The Klein four-group `Z2 × Z2`.
    pub fn klein() -> Self {
        let z2 = FiniteGroup::cyclic(2);
        FiniteGroup::product(&z2, &z2)
    }

    /// Symmetric group on three letters, elements enumerated as permutations.
    pub fn symmetric_3() -> Self {
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let find = |r: [usize; 3]| perms.iter().position(|p| *p == r).unwrap();
        let table = perms
            .iter()
            .map(|p| perms.iter().map(|q| find(compose(p, q))).collect())
            .collect();
        validate_group(table).expect("S3 table is a group")
    }
}

/// Validate a multiplication table and fill in identity and inverses.
///
/// Checks run in the order: shape/range, associativity, identity, inverses,
/// row/column permutations; the first violation is reported.
pub fn validate_group(table: Vec<Vec<usize>>) -> Result<FiniteGroup, GroupError> {
    let n = table.len();
    if n == 0 || table.iter().any(|row| row.len() != n) {
        return Err(GroupError::InvalidShape);
    }
    for (g, row) in table.iter().enumerate() {
        for (h, &v) in row.iter().enumerate() {
            if v >= n {
                return Err(GroupError::EntryOutOfRange { g, h, value: v });
            }
        }
    }
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                if table[table[g][h]][k] != table[g][table[h][k]] {
                    return Err(GroupError::NotAssociative { g, h, k });
                }
            }
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or(GroupError::NoIdentity)?;
    let mut inverse = vec![0usize; n];
    for g in 0..n {
        inverse[g] = (0..n)
            .find(|&h| table[g][h] == identity && table[h][g] == identity)
            .ok_or(GroupError::NoInverse(g))?;
    }
    for g in 0..n {
        let mut seen_row = vec![false; n];
        let mut seen_col = vec![false; n];
        for h in 0..n {
            seen_row[table[g][h]] = true;
            seen_col[table[h][g]] = true;
        }
        if seen_row.contains(&false) || seen_col.contains(&false) {
            return Err(GroupError::NotAPermutationRow(g));
        }
    }
    Ok(FiniteGroup { order: n, table, identity, inverse })
}
