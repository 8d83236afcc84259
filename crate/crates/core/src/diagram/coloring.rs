//! Fox n-colorings.
//!
//! A coloring assigns a value in Z/n to every arc so that at each crossing
//! twice the over-arc equals the sum of the two under-arcs. The number of
//! colorings is computed from an integer diagonalization (Smith-style) of
//! the crossing relation matrix, which stays correct for composite n where
//! plain rank arguments fail.

use super::{Diagram, Role};

impl Diagram {
    /// Integer crossing relation matrix, one row per crossing: +2 on the
    /// over arc, -1 on each under arc (entries accumulate when arcs
    /// coincide, as they do at curls).
    pub(crate) fn coloring_matrix(&self) -> Vec<Vec<i128>> {
        let arcs = self.arc_count();
        let c = self.crossings();
        if c == 0 {
            return Vec::new();
        }
        let pos_arcs = self.arcs_at_positions();
        let mut over_arc = vec![usize::MAX; c];
        let mut under_in = vec![usize::MAX; c];
        let mut under_out = vec![usize::MAX; c];
        for (i, p) in self.code().iter().enumerate() {
            let (incoming, outgoing) = pos_arcs[i];
            match p.role {
                Role::Over => over_arc[p.crossing] = incoming,
                Role::Under => {
                    under_in[p.crossing] = incoming;
                    under_out[p.crossing] = outgoing;
                }
            }
        }
        let mut m = vec![vec![0i128; arcs]; c];
        for k in 0..c {
            m[k][over_arc[k]] += 2;
            m[k][under_in[k]] -= 1;
            m[k][under_out[k]] -= 1;
        }
        m
    }

    /// Number of Fox n-colorings, including the n constant ones.
    pub fn fox_colorings(&self, n: u64) -> u128 {
        assert!(n >= 2, "colorings need a modulus of at least 2");
        let arcs = self.arc_count() as u32;
        let m = self.coloring_matrix();
        if m.is_empty() {
            return (n as u128).pow(arcs);
        }
        let diag = diagonalize(m);
        let rank = diag.len() as u32;
        let mut count: u128 = (n as u128).pow(arcs - rank);
        for d in diag {
            count *= gcd(d.unsigned_abs(), n as u128);
        }
        count
    }
}

/// Diagonalize an integer matrix by unimodular row/column operations and
/// return the nonzero diagonal entries. Divisibility ordering is not
/// needed for counting solutions mod n, so it is not enforced.
pub(crate) fn diagonalize(mut m: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut k = 0usize;
    while k < rows.min(cols) {
        // Pick the minimal-magnitude nonzero entry as the pivot to limit
        // entry growth.
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if m[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        // Reduce the pivot row and column; repeat until clean because a
        // reduction step can reintroduce residues.
        loop {
            let mut dirty = false;
            for i in k + 1..rows {
                if m[i][k] != 0 {
                    let q = m[i][k].div_euclid(m[k][k]);
                    if q != 0 {
                        for j in k..cols {
                            m[i][j] -= q * m[k][j];
                        }
                    }
                    if m[i][k] != 0 {
                        m.swap(k, i);
                        dirty = true;
                    }
                }
            }
            for j in k + 1..cols {
                if m[k][j] != 0 {
                    let q = m[k][j].div_euclid(m[k][k]);
                    if q != 0 {
                        for row in m.iter_mut().take(rows).skip(k) {
                            row[j] -= q * row[k];
                        }
                    }
                    if m[k][j] != 0 {
                        for row in m.iter_mut().take(rows).skip(k) {
                            row.swap(k, j);
                        }
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        diag.push(m[k][k]);
        k += 1;
    }
    diag.retain(|d| *d != 0);
    diag
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Brute-force coloring count; exponential, test oracle only.
pub fn brute_force_colorings(diagram: &Diagram, n: u64) -> u128 {
    let arcs = diagram.arc_count();
    let m = diagram.coloring_matrix();
    let mut count = 0u128;
    let mut assignment = vec![0u64; arcs];
    loop {
        let ok = m.iter().all(|row| {
            let mut acc: i128 = 0;
            for (j, &coef) in row.iter().enumerate() {
                acc += coef * assignment[j] as i128;
            }
            acc.rem_euclid(n as i128) == 0
        });
        if ok {
            count += 1;
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == arcs {
                return count;
            }
            assignment[pos] += 1;
            if assignment[pos] < n {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::extracted_trefoil;
    use super::*;

    #[test]
    fn unknot_colorings() {
        let u = Diagram::unknot();
        for n in [2u64, 3, 5, 7] {
            assert_eq!(u.fox_colorings(n), n as u128);
        }
    }

    #[test]
    fn trefoil_colorings_match_brute_force() {
        let d = extracted_trefoil();
        assert_eq!(d.fox_colorings(3), 9);
        assert_eq!(brute_force_colorings(&d, 3), 9);
        for n in [2u64, 3, 5, 7] {
            assert_eq!(d.fox_colorings(n), brute_force_colorings(&d, n));
        }
    }

    #[test]
    fn figure_eight_colorings() {
        let d = Diagram::parse_pd("X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)").unwrap();
        assert_eq!(d.fox_colorings(5), 25);
        assert_eq!(brute_force_colorings(&d, 5), 25);
        assert_eq!(d.fox_colorings(3), 3);
        assert_eq!(brute_force_colorings(&d, 3), 3);
    }

    #[test]
    fn one_curl_unknot_colorings() {
        let d = Diagram::parse_gauss("O1+ U1+").unwrap();
        for n in [2u64, 3, 5, 7] {
            assert_eq!(d.fox_colorings(n), n as u128);
            assert_eq!(brute_force_colorings(&d, n), n as u128);
        }
    }

    #[test]
    fn diagonalize_handles_composite_moduli() {
        // x = y and 2x = 2y mod n: solutions are the diagonal, n per n.
        let m = vec![vec![1, -1], vec![2, -2]];
        let diag = diagonalize(m);
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].abs(), 1);
    }
}
