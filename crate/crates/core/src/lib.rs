//! Fixed-angle orthogonal equilateral chains on the square lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: chains, turn sequences and segment decompositions.
//! * [`fold`]: turn sequences to lattice coordinates, noncrossing, closure,
//!   H–H contacts and box containment.
//! * [`search`] and [`solvers`]: exact search for flattening closed chains,
//!   HP-optimal folding and packing into squares, plus an exhaustive
//!   enumerator used as an oracle.
//! * [`gadgets`]: parametric chain fragments used by the 3SAT compiler.
//! * [`reduction`]: compiles leveled planar 3SAT instances into chain
//!   instances and maps assignments to foldings and back.
//! * [`io`] and [`render`]: text formats and SVG output.

pub mod fold;
pub mod gadgets;
pub mod io;
pub mod model;
pub mod poly;
pub mod reduction;
pub mod render;
pub mod search;
pub mod solvers;

pub use fold::{Box2, Dir, LatticeConfiguration, Point, Pose};
pub use model::{
    Angle, ChainError, Color, FixedAngleChain, SegmentDecomposition, Topology, Turn, TurnSequence,
};
