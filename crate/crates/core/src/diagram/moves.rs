//! Reidemeister move sites and rewrites.
//!
//! Sites are enumerated from the face structure: curls are monogon faces,
//! removable strand-pairs are bigon faces with one strand over at both
//! corners, triangle moves are degree-3 faces whose over/under pattern is
//! transitive (one strand over both others or under both others — the two
//! cyclic patterns cannot arise from a geometric triple-point event).
//! Every move is a local rewrite of the passage sequence; signs and the
//! slot convention keep the rewritten code planar.

use super::{Diagram, DiagramError, Passage, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    R1Add,
    R1Remove,
    R2Add,
    R2Remove,
    R3,
}

impl std::fmt::Display for MoveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MoveKind::R1Add => write!(f, "R1_add"),
            MoveKind::R1Remove => write!(f, "R1_remove"),
            MoveKind::R2Add => write!(f, "R2_add"),
            MoveKind::R2Remove => write!(f, "R2_remove"),
            MoveKind::R3 => write!(f, "R3"),
        }
    }
}

/// Location and variant data for one applicable move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SiteData {
    /// Insert a curl on `edge`; the knot meets the new crossing first with
    /// `first_role`, and the crossing has `sign`.
    R1Add {
        edge: usize,
        first_role: Role,
        sign: i8,
    },
    /// Remove the curl crossing bounding a monogon face.
    R1Remove { crossing: usize },
    /// Push the strand of `side_a` across the strand of `side_b` through
    /// their common face (sides are edge-end ids of that face's walk).
    /// `over_first` puts the pushed strand on top at both new crossings.
    R2Add {
        side_a: usize,
        side_b: usize,
        over_first: bool,
    },
    /// Remove the bigon face with these corner crossings.
    R2Remove { crossing_a: usize, crossing_b: usize },
    /// Slide across the triangle face with these side edges.
    R3 { edges: [usize; 3] },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub data: SiteData,
    stamp: u64,
}

impl MoveSite {
    /// Short human-readable variant tag (chirality / over-under pattern).
    pub fn variant_tag(&self) -> String {
        match &self.data {
            SiteData::R1Add {
                first_role, sign, ..
            } => format!(
                "{}{}",
                if *first_role == Role::Over { "O" } else { "U" },
                if *sign > 0 { "+" } else { "-" }
            ),
            SiteData::R1Remove { .. } => "curl".into(),
            SiteData::R2Add { over_first, .. } => {
                if *over_first {
                    "over".into()
                } else {
                    "under".into()
                }
            }
            SiteData::R2Remove { .. } => "bigon".into(),
            SiteData::R3 { .. } => "triangle".into(),
        }
    }

    /// Writhe change this site causes when applied.
    pub fn writhe_delta(&self) -> i64 {
        match &self.data {
            SiteData::R1Add { sign, .. } => *sign as i64,
            SiteData::R1Remove { .. } => 0, // filled by caller context; see apply
            _ => 0,
        }
    }
}

/// Orientation convention factor for R2 insertions: the face walk keeps
/// its face on the right for the slot tables above, which mirrors the
/// textbook frame. Pinned by the planarity (Euler) and round-trip tests.
const R2_SIGN_FLIP: i8 = -1;

impl Diagram {
    /// Enumerate the applicable sites of one move kind.
    pub fn enumerate_move_sites(&self, kind: MoveKind) -> Vec<MoveSite> {
        let stamp = self.stamp();
        let mut sites = Vec::new();
        match kind {
            MoveKind::R1Add => {
                let edges = if self.crossings() == 0 {
                    1
                } else {
                    self.code().len()
                };
                for edge in 0..edges {
                    for first_role in [Role::Over, Role::Under] {
                        for sign in [1i8, -1] {
                            sites.push(MoveSite {
                                kind,
                                data: SiteData::R1Add {
                                    edge,
                                    first_role,
                                    sign,
                                },
                                stamp,
                            });
                        }
                    }
                }
            }
            MoveKind::R1Remove => {
                // A curl crossing can bound a monogon on both sides (the
                // one-curl unknot does, seen on the sphere); either way it
                // is one removable curl.
                let mut curls: Vec<usize> = Vec::new();
                for face in self.faces() {
                    if face.degree() == 1 {
                        let crossing = face.ends[0] / 4;
                        if !curls.contains(&crossing) {
                            curls.push(crossing);
                        }
                    }
                }
                for crossing in curls {
                    sites.push(MoveSite {
                        kind,
                        data: SiteData::R1Remove { crossing },
                        stamp,
                    });
                }
            }
            MoveKind::R2Remove => {
                let tables = self.end_tables();
                for face in self.faces() {
                    if face.degree() != 2 {
                        continue;
                    }
                    let (c0, c1) = (face.ends[0] / 4, face.ends[1] / 4);
                    let (e0, e1) = (
                        tables.edge_of_end[face.ends[0]],
                        tables.edge_of_end[face.ends[1]],
                    );
                    if c0 == c1 || e0 == e1 {
                        continue;
                    }
                    // One strand of the bigon must be over at both corners.
                    if self.edge_fully(e0, Role::Over) || self.edge_fully(e1, Role::Over) {
                        sites.push(MoveSite {
                            kind,
                            data: SiteData::R2Remove {
                                crossing_a: c0,
                                crossing_b: c1,
                            },
                            stamp,
                        });
                    }
                }
            }
            MoveKind::R3 => {
                let tables = self.end_tables();
                for face in self.faces() {
                    if face.degree() != 3 {
                        continue;
                    }
                    let corners = [
                        face.ends[0] / 4,
                        face.ends[1] / 4,
                        face.ends[2] / 4,
                    ];
                    let edges = [
                        tables.edge_of_end[face.ends[0]],
                        tables.edge_of_end[face.ends[1]],
                        tables.edge_of_end[face.ends[2]],
                    ];
                    if corners[0] == corners[1]
                        || corners[1] == corners[2]
                        || corners[0] == corners[2]
                        || edges[0] == edges[1]
                        || edges[1] == edges[2]
                        || edges[0] == edges[2]
                    {
                        continue;
                    }
                    // Transitive over/under pattern: some side is the top
                    // strand (over at both its corners).
                    if edges.iter().any(|&e| self.edge_fully(e, Role::Over)) {
                        sites.push(MoveSite {
                            kind,
                            data: SiteData::R3 { edges },
                            stamp,
                        });
                    }
                }
            }
            MoveKind::R2Add => {
                if self.crossings() == 0 {
                    return sites;
                }
                let tables = self.end_tables();
                for face in self.faces() {
                    for &a in &face.ends {
                        for &b in &face.ends {
                            if tables.edge_of_end[a] == tables.edge_of_end[b] {
                                continue;
                            }
                            for over_first in [true, false] {
                                sites.push(MoveSite {
                                    kind,
                                    data: SiteData::R2Add {
                                        side_a: a,
                                        side_b: b,
                                        over_first,
                                    },
                                    stamp,
                                });
                            }
                        }
                    }
                }
            }
        }
        sites
    }

    fn edge_fully(&self, edge: usize, role: Role) -> bool {
        let n = self.code().len();
        self.code()[edge].role == role && self.code()[(edge + 1) % n].role == role
    }

    /// Apply a move site enumerated from this exact diagram.
    pub fn apply_move(&self, site: &MoveSite) -> Result<Diagram, DiagramError> {
        if site.stamp != self.stamp() {
            return Err(DiagramError::StaleSite);
        }
        match site.data {
            SiteData::R1Add {
                edge,
                first_role,
                sign,
            } => {
                let c = self.crossings();
                let mut code = Vec::with_capacity(self.code().len() + 2);
                let pair = [
                    Passage {
                        crossing: c,
                        role: first_role,
                    },
                    Passage {
                        crossing: c,
                        role: first_role.flipped(),
                    },
                ];
                if c == 0 {
                    code.extend_from_slice(&pair);
                } else {
                    for (i, p) in self.code().iter().enumerate() {
                        code.push(*p);
                        if i == edge {
                            code.extend_from_slice(&pair);
                        }
                    }
                }
                let mut signs = self.signs_vec();
                signs.push(sign);
                Diagram::from_parts(code, signs)
            }
            SiteData::R1Remove { crossing } => self.without_crossings(&[crossing]),
            SiteData::R2Remove {
                crossing_a,
                crossing_b,
            } => self.without_crossings(&[crossing_a, crossing_b]),
            SiteData::R3 { edges } => {
                let n = self.code().len();
                let mut code = self.code().to_vec();
                for &e in &edges {
                    code.swap(e, (e + 1) % n);
                }
                Diagram::from_parts(code, self.signs_vec())
            }
            SiteData::R2Add {
                side_a,
                side_b,
                over_first,
            } => {
                let tables = self.end_tables();
                let e1 = tables.edge_of_end[side_a];
                let e2 = tables.edge_of_end[side_b];
                let a_head = tables.is_head[side_a];
                let b_head = tables.is_head[side_b];
                let c = self.crossings();
                let (m_first, m_second) = (c, c + 1); // along the face walk of side_a
                let r1 = if over_first { Role::Over } else { Role::Under };
                let r2 = r1.flipped();

                // Knot-order insertions: a walk that opposes the knot
                // direction reverses the pair.
                let pair_e1 = if a_head {
                    [m_second, m_first]
                } else {
                    [m_first, m_second]
                };
                let pair_e2 = if b_head {
                    [m_first, m_second]
                } else {
                    [m_second, m_first]
                };

                let sign_first = R2_SIGN_FLIP
                    * if a_head == b_head { 1 } else { -1 }
                    * if over_first { 1 } else { -1 };

                let mut code = Vec::with_capacity(self.code().len() + 4);
                for (i, p) in self.code().iter().enumerate() {
                    code.push(*p);
                    if i == e1 {
                        code.extend(pair_e1.iter().map(|&m| Passage {
                            crossing: m,
                            role: r1,
                        }));
                    }
                    if i == e2 {
                        code.extend(pair_e2.iter().map(|&m| Passage {
                            crossing: m,
                            role: r2,
                        }));
                    }
                }
                let mut signs = self.signs_vec();
                signs.push(sign_first);
                signs.push(-sign_first);
                Diagram::from_parts(code, signs)
            }
        }
    }

    fn signs_vec(&self) -> Vec<i8> {
        (0..self.crossings()).map(|c| self.sign(c)).collect()
    }

    fn without_crossings(&self, remove: &[usize]) -> Result<Diagram, DiagramError> {
        let c = self.crossings();
        let mut relabel = vec![usize::MAX; c];
        let mut next = 0usize;
        for id in 0..c {
            if !remove.contains(&id) {
                relabel[id] = next;
                next += 1;
            }
        }
        let code: Vec<Passage> = self
            .code()
            .iter()
            .filter(|p| !remove.contains(&p.crossing))
            .map(|p| Passage {
                crossing: relabel[p.crossing],
                role: p.role,
            })
            .collect();
        let signs: Vec<i8> = (0..c)
            .filter(|id| !remove.contains(id))
            .map(|id| self.sign(id))
            .collect();
        Diagram::from_parts(code, signs)
    }
}
