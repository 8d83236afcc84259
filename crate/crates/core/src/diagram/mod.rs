//! Combinatorial knot diagrams.
//!
//! A diagram is stored as the cyclic sequence of crossing passages along
//! the knot (a signed Gauss code): `code[i]` says which crossing the knot
//! meets at step `i` and whether it passes over or under; `signs[c]` is the
//! crossing sign, determined by the orientation of (over-tangent,
//! under-tangent). Everything else — arcs, edges, faces, move sites — is
//! derived from this sequence, so traversal closure holds by construction.

mod coloring;
mod faces;
mod moves;

pub use coloring::brute_force_colorings;
pub use faces::Face;
pub use moves::{MoveKind, MoveSite, SiteData};

use crate::curve::FourierLoop;
use crate::genericity::DoublePoint;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Over,
    Under,
}

impl Role {
    pub fn flipped(self) -> Role {
        match self {
            Role::Over => Role::Under,
            Role::Under => Role::Over,
        }
    }
}

/// One crossing passage along the knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Passage {
    pub crossing: usize,
    pub role: Role,
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("malformed code at symbol {position}: {msg}")]
    MalformedCode { position: usize, msg: String },
    #[error("ambiguous over/under: |z gap| = {z_gap:.3e} at crossing near u1={u1:.6}, u2={u2:.6}")]
    AmbiguousZ { u1: f64, u2: f64, z_gap: f64 },
    #[error("move site is stale: the diagram changed since enumeration")]
    StaleSite,
}

/// A combinatorial knot diagram. Immutable; moves return new values.
#[derive(Debug, Clone)]
pub struct Diagram {
    /// Passages in traversal order; length 2C. Empty for the unknot.
    code: Vec<Passage>,
    /// Crossing signs (+1/-1), indexed by crossing id.
    signs: Vec<i8>,
    /// Curve parameters of the passages when extracted from geometry.
    params: Option<Vec<f64>>,
}

/// Structural equality on the code; extraction parameters are incidental.
impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && self.signs == other.signs
    }
}
impl Eq for Diagram {}

impl Diagram {
    /// The crossingless unknot: one arc, zero crossings.
    pub fn unknot() -> Self {
        Diagram {
            code: Vec::new(),
            signs: Vec::new(),
            params: None,
        }
    }

    /// Build from a passage sequence and signs, validating the two-visit
    /// invariant.
    pub fn from_parts(code: Vec<Passage>, signs: Vec<i8>) -> Result<Self, DiagramError> {
        let c = signs.len();
        if code.len() != 2 * c {
            return Err(DiagramError::MalformedCode {
                position: 0,
                msg: format!("{} passages for {} crossings", code.len(), c),
            });
        }
        let mut seen = vec![(false, false); c];
        for (i, p) in code.iter().enumerate() {
            if p.crossing >= c {
                return Err(DiagramError::MalformedCode {
                    position: i + 1,
                    msg: format!("crossing id {} out of range", p.crossing),
                });
            }
            let slot = match p.role {
                Role::Over => &mut seen[p.crossing].0,
                Role::Under => &mut seen[p.crossing].1,
            };
            if *slot {
                return Err(DiagramError::MalformedCode {
                    position: i + 1,
                    msg: format!(
                        "crossing {} visited twice as {}",
                        p.crossing + 1,
                        if p.role == Role::Over { "O" } else { "U" }
                    ),
                });
            }
            *slot = true;
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(DiagramError::MalformedCode {
                position: 0,
                msg: "signs must be +1 or -1".into(),
            });
        }
        Ok(Diagram {
            code,
            signs,
            params: None,
        })
    }

    pub fn crossings(&self) -> usize {
        self.signs.len()
    }

    pub fn code(&self) -> &[Passage] {
        &self.code
    }

    pub fn sign(&self, crossing: usize) -> i8 {
        self.signs[crossing]
    }

    /// Number of arcs (maximal strands between under-passages).
    pub fn arc_count(&self) -> usize {
        self.crossings().max(1)
    }

    /// Curve parameters of the passages, present only for extracted
    /// diagrams.
    pub fn passage_params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    /// Sum of crossing signs.
    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Fingerprint used to detect stale move sites.
    pub fn stamp(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.code.hash(&mut h);
        self.signs.hash(&mut h);
        h.finish()
    }

    /// Arc index carried into each passage position, plus the arc left on.
    ///
    /// Arcs are numbered 0..A-1 in traversal order starting after the first
    /// under-passage. For the unknot this is a single arc.
    pub(crate) fn arcs_at_positions(&self) -> Vec<(usize, usize)> {
        let n = self.code.len();
        if n == 0 {
            return Vec::new();
        }
        let first_under = self
            .code
            .iter()
            .position(|p| p.role == Role::Under)
            .expect("a nonempty diagram has under passages");
        let arcs = self.arc_count();
        let mut out = vec![(0usize, 0usize); n];
        let mut arc = 0usize;
        for k in 0..n {
            let pos = (first_under + 1 + k) % n;
            let incoming = arc;
            if self.code[pos].role == Role::Under {
                arc = (arc + 1) % arcs;
            }
            out[pos] = (incoming, arc);
        }
        out
    }

    // -----------------------------------------------------------------
    // Geometry extraction
    // -----------------------------------------------------------------

    /// Build the diagram of a validated projection: passages ordered by
    /// parameter, over-strand decided by the larger z, sign by the
    /// orientation of (projected over-tangent, projected under-tangent).
    pub fn extract(
        loop_: &FourierLoop,
        double_points: &[DoublePoint],
        z_tol: f64,
    ) -> Result<Self, DiagramError> {
        let c = double_points.len();
        if c == 0 {
            return Ok(Diagram::unknot());
        }
        // One passage per branch of each double point.
        let mut passages: Vec<(f64, usize, Role)> = Vec::with_capacity(2 * c);
        for (id, dp) in double_points.iter().enumerate() {
            if dp.z_gap.abs() < z_tol {
                return Err(DiagramError::AmbiguousZ {
                    u1: dp.u1,
                    u2: dp.u2,
                    z_gap: dp.z_gap,
                });
            }
            let (role1, role2) = if dp.z_gap > 0.0 {
                (Role::Over, Role::Under)
            } else {
                (Role::Under, Role::Over)
            };
            passages.push((dp.u1, id, role1));
            passages.push((dp.u2, id, role2));
        }
        passages.sort_by(|a, b| a.0.total_cmp(&b.0));

        // Renumber crossings by first appearance along the traversal.
        let mut relabel = vec![usize::MAX; c];
        let mut next = 0usize;
        let mut code = Vec::with_capacity(2 * c);
        let mut params = Vec::with_capacity(2 * c);
        for &(u, old, role) in &passages {
            if relabel[old] == usize::MAX {
                relabel[old] = next;
                next += 1;
            }
            code.push(Passage {
                crossing: relabel[old],
                role,
            });
            params.push(u);
        }
        let mut signs = vec![0i8; c];
        for (old, dp) in double_points.iter().enumerate() {
            let (u_over, u_under) = if dp.z_gap > 0.0 {
                (dp.u1, dp.u2)
            } else {
                (dp.u2, dp.u1)
            };
            let t_over = loop_.derivative(u_over, 1).project();
            let t_under = loop_.derivative(u_under, 1).project();
            signs[relabel[old]] = if t_over.cross(t_under) > 0.0 { 1 } else { -1 };
        }
        let mut d = Diagram::from_parts(code, signs)?;
        d.params = Some(params);
        Ok(d)
    }

    // -----------------------------------------------------------------
    // Gauss code
    // -----------------------------------------------------------------

    /// Canonical Gauss code text, e.g. `O1+ U2+ O3+ U1+ O2+ U3+`.
    /// The unknot prints as the empty string.
    pub fn gauss_code(&self) -> String {
        let mut relabel = vec![usize::MAX; self.crossings()];
        let mut next = 0usize;
        let mut words = Vec::with_capacity(self.code.len());
        for p in &self.code {
            if relabel[p.crossing] == usize::MAX {
                relabel[p.crossing] = next;
                next += 1;
            }
            words.push(format!(
                "{}{}{}",
                if p.role == Role::Over { "O" } else { "U" },
                relabel[p.crossing] + 1,
                if self.signs[p.crossing] > 0 { "+" } else { "-" }
            ));
        }
        words.join(" ")
    }

    /// Parse Gauss code text. Whitespace-separated `O<k><s>` / `U<k><s>`
    /// symbols; an empty text is the unknot.
    pub fn parse_gauss(text: &str) -> Result<Self, DiagramError> {
        let mut ids: Vec<u64> = Vec::new();
        let mut code = Vec::new();
        let mut signs: Vec<Option<i8>> = Vec::new();
        for (pos, token) in text.split_whitespace().enumerate() {
            let err = |msg: String| DiagramError::MalformedCode {
                position: pos + 1,
                msg,
            };
            let role = match token.chars().next() {
                Some('O') => Role::Over,
                Some('U') => Role::Under,
                _ => return Err(err(format!("symbol {token:?} must start with O or U"))),
            };
            let body = &token[1..];
            let sign = match body.chars().last() {
                Some('+') => 1i8,
                Some('-') => -1i8,
                _ => return Err(err(format!("symbol {token:?} must end with + or -"))),
            };
            let id: u64 = body[..body.len() - 1]
                .parse()
                .map_err(|_| err(format!("bad crossing id in {token:?}")))?;
            let crossing = match ids.iter().position(|&x| x == id) {
                Some(k) => k,
                None => {
                    ids.push(id);
                    signs.push(None);
                    ids.len() - 1
                }
            };
            match signs[crossing] {
                None => signs[crossing] = Some(sign),
                Some(s) if s != sign => {
                    return Err(err(format!("crossing {id} has conflicting signs")))
                }
                _ => {}
            }
            code.push(Passage { crossing, role });
        }
        let signs: Vec<i8> = signs.into_iter().map(|s| s.unwrap()).collect();
        Diagram::from_parts(code, signs)
    }

    /// Parse PD notation: per crossing `X(a,b,c,d)`, arc ends listed
    /// counterclockwise from the incoming under-strand, edges numbered
    /// 1..2C along the traversal.
    pub fn parse_pd(text: &str) -> Result<Self, DiagramError> {
        let mut quads: Vec<[usize; 4]> = Vec::new();
        for (pos, token) in text.split_whitespace().enumerate() {
            let err = |msg: String| DiagramError::MalformedCode {
                position: pos + 1,
                msg,
            };
            let inner = token
                .strip_prefix("X(")
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| err(format!("expected X(a,b,c,d), got {token:?}")))?;
            let parts: Result<Vec<usize>, _> =
                inner.split(',').map(|v| v.trim().parse::<usize>()).collect();
            let parts = parts.map_err(|_| err(format!("bad edge number in {token:?}")))?;
            if parts.len() != 4 {
                return Err(err(format!("expected 4 edges, got {}", parts.len())));
            }
            quads.push([parts[0], parts[1], parts[2], parts[3]]);
        }
        if quads.is_empty() {
            return Ok(Diagram::unknot());
        }
        let c = quads.len();
        let n = 2 * c;
        let err0 = |msg: String| DiagramError::MalformedCode {
            position: 1,
            msg,
        };
        let wrap = |e: usize| if e == n { n } else { e % n };
        let succ = |e: usize| if e == n { 1 } else { e + 1 };
        let mut code: Vec<Option<Passage>> = vec![None; n];
        let mut signs = vec![0i8; c];
        for (cid, &[a, b, cc, d]) in quads.iter().enumerate() {
            for e in [a, b, cc, d] {
                if e == 0 || e > n {
                    return Err(err0(format!("edge {e} out of range 1..{n}")));
                }
            }
            if succ(a) != cc {
                return Err(err0(format!(
                    "X({a},{b},{cc},{d}): under strand must leave on edge {}",
                    succ(a)
                )));
            }
            // b = over-out means the over strand runs d -> b: positive.
            let (over_in, sign) = if succ(d) == b {
                (d, 1i8)
            } else if succ(b) == d {
                (b, -1i8)
            } else {
                return Err(err0(format!(
                    "X({a},{b},{cc},{d}): over strand edges are not consecutive"
                )));
            };
            signs[cid] = sign;
            // Incoming edge e arrives at passage index e (mod 2C), 0-based.
            for (edge, role) in [(a, Role::Under), (over_in, Role::Over)] {
                let idx = wrap(edge) % n;
                if code[idx].is_some() {
                    return Err(err0(format!("edge {edge} used as incoming twice")));
                }
                code[idx] = Some(Passage {
                    crossing: cid,
                    role,
                });
            }
        }
        let code: Option<Vec<Passage>> = code.into_iter().collect();
        let code = code.ok_or_else(|| err0("not all edges were used".into()))?;
        Diagram::from_parts(code, signs)
    }

    /// Parse either Gauss code or PD notation, detected from the content.
    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        if text.split_whitespace().next().is_some_and(|t| t.starts_with("X(")) {
            Self::parse_pd(text)
        } else {
            Self::parse_gauss(text)
        }
    }

    // -----------------------------------------------------------------
    // Isomorphism
    // -----------------------------------------------------------------

    /// Canonical form of the code under crossing relabeling, basepoint
    /// rotation, and orientation reversal.
    fn canonical_form(&self) -> Vec<(usize, bool, i8)> {
        let n = self.code.len();
        if n == 0 {
            return Vec::new();
        }
        let mut best: Option<Vec<(usize, bool, i8)>> = None;
        for reversed in [false, true] {
            for start in 0..n {
                let mut relabel = vec![usize::MAX; self.crossings()];
                let mut next = 0usize;
                let mut cand = Vec::with_capacity(n);
                for k in 0..n {
                    let idx = if reversed {
                        (start + n - k) % n
                    } else {
                        (start + k) % n
                    };
                    let p = self.code[idx];
                    if relabel[p.crossing] == usize::MAX {
                        relabel[p.crossing] = next;
                        next += 1;
                    }
                    cand.push((
                        relabel[p.crossing],
                        p.role == Role::Over,
                        self.signs[p.crossing],
                    ));
                }
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        best.unwrap()
    }

    /// True when the diagrams agree up to relabeling, rotation of the
    /// basepoint, and orientation reversal.
    pub fn isomorphic(&self, other: &Diagram) -> bool {
        self.crossings() == other.crossings() && self.canonical_form() == other.canonical_form()
    }
}

impl std::fmt::Display for Diagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.gauss_code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genericity::{find_double_points, GenericityConfig};

    pub(crate) fn trefoil_loop() -> FourierLoop {
        use crate::curve::CoordSeries;
        FourierLoop::new(
            CoordSeries::zero(3).with(1, 0.0, 1.0).with(2, 0.0, 2.0),
            CoordSeries::zero(3).with(1, 1.0, 0.0).with(2, -2.0, 0.0),
            CoordSeries::zero(3).with(3, 0.0, -1.0),
        )
        .unwrap()
    }

    pub(crate) fn extracted_trefoil() -> Diagram {
        let l = trefoil_loop();
        let cfg = GenericityConfig::default();
        let dps = find_double_points(&l, &cfg).unwrap();
        Diagram::extract(&l, &dps, 1e-7).unwrap()
    }

    #[test]
    fn unknot_has_one_arc_no_crossings() {
        let u = Diagram::unknot();
        assert_eq!(u.crossings(), 0);
        assert_eq!(u.arc_count(), 1);
        assert_eq!(u.gauss_code(), "");
        assert_eq!(u.writhe(), 0);
    }

    #[test]
    fn trefoil_extraction() {
        let d = extracted_trefoil();
        assert_eq!(d.crossings(), 3);
        // Alternating along the traversal and all signs equal.
        assert_eq!(d.writhe().abs(), 3);
        let roles: Vec<Role> = d.code().iter().map(|p| p.role).collect();
        for w in roles.windows(2) {
            assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn mirrored_trefoil_flips_signs_and_roles() {
        let l = trefoil_loop();
        let mirrored = {
            use crate::curve::CoordSeries;
            FourierLoop::new(
                l.coord(0).clone(),
                l.coord(1).clone(),
                CoordSeries::zero(3).with(3, 0.0, 1.0),
            )
            .unwrap()
        };
        let cfg = GenericityConfig::default();
        let d = extracted_trefoil();
        let dps = find_double_points(&mirrored, &cfg).unwrap();
        let m = Diagram::extract(&mirrored, &dps, 1e-7).unwrap();
        assert_eq!(m.crossings(), 3);
        assert_eq!(m.writhe(), -d.writhe());
        for (a, b) in d.code().iter().zip(m.code().iter()) {
            assert_eq!(a.crossing, b.crossing);
            assert_eq!(a.role, b.role.flipped());
        }
        assert!(!d.isomorphic(&m));
    }

    #[test]
    fn gauss_round_trip() {
        let d = extracted_trefoil();
        let text = d.gauss_code();
        let parsed = Diagram::parse_gauss(&text).unwrap();
        assert!(d.isomorphic(&parsed));
        assert_eq!(parsed.gauss_code(), text);
    }

    #[test]
    fn parse_rejects_double_over() {
        let err = Diagram::parse_gauss("O1+ O1+ U2+ U2+").unwrap_err();
        match err {
            DiagramError::MalformedCode { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_sign_conflict() {
        assert!(Diagram::parse_gauss("O1+ U1-").is_err());
    }

    #[test]
    fn isomorphism_rotation_and_reversal() {
        let d = Diagram::parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+").unwrap();
        let rotated = Diagram::parse_gauss("O3+ U1+ O2+ U3+ O1+ U2+").unwrap();
        assert!(d.isomorphic(&rotated));
        assert!(d.isomorphic(&d));
        let unknot = Diagram::unknot();
        assert!(!d.isomorphic(&unknot));
        assert!(unknot.isomorphic(&Diagram::unknot()));
    }

    #[test]
    fn pd_trefoil_parses() {
        // Standard 3_1 PD code.
        let d = Diagram::parse_pd("X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)").unwrap();
        assert_eq!(d.crossings(), 3);
        assert_eq!(d.writhe().abs(), 3);
        // Same knot as the extracted trefoil up to mirror: compare
        // crossing count and alternation.
        let roles: Vec<Role> = d.code().iter().map(|p| p.role).collect();
        for w in roles.windows(2) {
            assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn ambiguous_z_is_reported() {
        use crate::genericity::DoublePoint;
        use crate::geom::Point2;
        let l = trefoil_loop();
        let dp = DoublePoint {
            u1: 0.3,
            u2: 2.0,
            pos: Point2::new(0.0, 0.0),
            transversality_margin: 1.0,
            z_gap: 1e-12,
        };
        match Diagram::extract(&l, &[dp], 1e-7) {
            Err(DiagramError::AmbiguousZ { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
