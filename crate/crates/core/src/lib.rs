//! Numerical knot diagrams: validate that a smooth closed space curve
//! projects to a genuine knot diagram, extract the combinatorial diagram,
//! rewrite it with Reidemeister moves, and trace a smooth isotopy through
//! the isolated singular events (cusps, tangencies, triple points) that
//! realize those moves.
//!
//! The crate is organized around the pipeline:
//!
//! 1. [`curve`] — Fourier-series loops and keyframed isotopy families with
//!    exact derivatives.
//! 2. [`genericity`] — numerical checks that a projection is a diagram
//!    (immersed projection, double points only, transverse crossings),
//!    plus general-position perturbation.
//! 3. [`diagram`] — combinatorial diagrams: Gauss/PD codes, faces, moves,
//!    writhe and Fox colorings.
//! 4. [`tracer`] — follow a family through time, localize and classify the
//!    singular events, and emit a verified move script.
//! 5. [`svg`] — planar renderings with broken under-strands.

pub mod curve;
pub mod diagram;
pub mod genericity;
pub mod geom;
mod numeric;
pub mod svg;
pub mod tracer;

pub use curve::{CoordSeries, CurveError, FamilyJet, FourierLoop, IsotopyFamily};
pub use geom::{Point2, Point3, Vec2, Vec3};
