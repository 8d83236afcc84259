//! Faces of the diagram seen as an oriented 4-valent map.
//!
//! Each crossing carries four slots in counterclockwise order, fixed by
//! the crossing sign:
//!
//! - positive: `[under-in, over-out, under-out, over-in]`
//! - negative: `[under-in, over-in, under-out, over-out]`
//!
//! An edge end is addressed as `4*crossing + slot`. Faces are the orbits
//! of `end -> rotate(companion(end))`, so they exist without any geometry;
//! for a planar (realizable) code, V - E + F = 2.

use super::{Diagram, Role};

/// One face: the edge ends visited by its boundary walk.
#[derive(Debug, Clone)]
pub struct Face {
    /// Edge-end ids in walk order.
    pub ends: Vec<usize>,
}

impl Face {
    pub fn degree(&self) -> usize {
        self.ends.len()
    }
}

/// Connectivity tables tying edge ends to crossings and edges.
pub(crate) struct EndTables {
    /// For each end id: the edge it belongs to, or usize::MAX if the slot
    /// is unused (never happens on valid diagrams with C >= 1).
    pub edge_of_end: Vec<usize>,
    /// Whether the end is the head (incoming side) of its edge.
    pub is_head: Vec<bool>,
    /// The other end of the same edge.
    pub companion: Vec<usize>,
}

pub(crate) fn in_slot(role: Role, sign: i8) -> usize {
    match (role, sign > 0) {
        (Role::Under, _) => 0,
        (Role::Over, true) => 3,
        (Role::Over, false) => 1,
    }
}

pub(crate) fn out_slot(role: Role, sign: i8) -> usize {
    match (role, sign > 0) {
        (Role::Under, _) => 2,
        (Role::Over, true) => 1,
        (Role::Over, false) => 3,
    }
}

impl Diagram {
    /// Edge count: edges connect consecutive passages. The crossingless
    /// unknot has a single closed edge.
    pub fn edge_count(&self) -> usize {
        self.code().len().max(1)
    }

    pub(crate) fn end_tables(&self) -> EndTables {
        let n = self.code().len();
        let c = self.crossings();
        let mut edge_of_end = vec![usize::MAX; 4 * c];
        let mut is_head = vec![false; 4 * c];
        let mut companion = vec![usize::MAX; 4 * c];
        for e in 0..n {
            let tail_p = self.code()[e];
            let head_p = self.code()[(e + 1) % n];
            let tail_end = 4 * tail_p.crossing + out_slot(tail_p.role, self.sign(tail_p.crossing));
            let head_end = 4 * head_p.crossing + in_slot(head_p.role, self.sign(head_p.crossing));
            edge_of_end[tail_end] = e;
            edge_of_end[head_end] = e;
            is_head[head_end] = true;
            companion[tail_end] = head_end;
            companion[head_end] = tail_end;
        }
        EndTables {
            edge_of_end,
            is_head,
            companion,
        }
    }

    /// All faces of the induced 4-valent map. The crossingless unknot has
    /// two faces; their boundary walks carry no crossing ends.
    pub fn faces(&self) -> Vec<Face> {
        let c = self.crossings();
        if c == 0 {
            return vec![Face { ends: Vec::new() }, Face { ends: Vec::new() }];
        }
        let tables = self.end_tables();
        let next = |end: usize| -> usize {
            let comp = tables.companion[end];
            4 * (comp / 4) + (comp + 1) % 4
        };
        let mut seen = vec![false; 4 * c];
        let mut faces = Vec::new();
        for start in 0..4 * c {
            if seen[start] {
                continue;
            }
            let mut ends = Vec::new();
            let mut cur = start;
            loop {
                seen[cur] = true;
                ends.push(cur);
                cur = next(cur);
                if cur == start {
                    break;
                }
            }
            faces.push(Face { ends });
        }
        faces
    }

    /// Euler characteristic of the induced map; 2 exactly when the code is
    /// realizable in the plane (well, the sphere).
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.crossings() as i64;
        let e = if self.crossings() == 0 {
            0
        } else {
            self.code().len() as i64
        };
        let f = if self.crossings() == 0 {
            2
        } else {
            self.faces().len() as i64
        };
        v - e + f
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::extracted_trefoil;
    use super::*;

    #[test]
    fn one_curl_unknot_faces() {
        let d = Diagram::parse_gauss("O1+ U1+").unwrap();
        let mut degs: Vec<usize> = d.faces().iter().map(|f| f.degree()).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 2]);
        assert_eq!(d.euler_characteristic(), 2);
    }

    #[test]
    fn trefoil_face_degrees() {
        let d = extracted_trefoil();
        let mut degs: Vec<usize> = d.faces().iter().map(|f| f.degree()).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![2, 2, 2, 3, 3]);
        assert_eq!(d.euler_characteristic(), 2);
    }

    #[test]
    fn figure_eight_pd_is_planar() {
        // Standard 4_1 PD code.
        let d = Diagram::parse_pd("X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)").unwrap();
        assert_eq!(d.crossings(), 4);
        assert_eq!(d.euler_characteristic(), 2);
        let mut degs: Vec<usize> = d.faces().iter().map(|f| f.degree()).collect();
        degs.sort_unstable();
        // 4 crossings, 8 edges, 6 faces.
        assert_eq!(degs.iter().sum::<usize>(), 16);
        assert_eq!(degs.len(), 6);
    }

    #[test]
    fn unknot_faces() {
        let u = Diagram::unknot();
        assert_eq!(u.faces().len(), 2);
        assert_eq!(u.euler_characteristic(), 2);
    }
}
