//! Parameter synthesis for parametric and interval Markov chains against
//! linear temporal logic.
//!
//! The pipeline translates an LTL formula into a generalized Büchi automaton
//! ([`gba`]), builds its product with a chain ([`product`]), classifies the
//! product SCCs, and reduces the acceptance probability to an equation system
//! ([`eqsys`]) that is either solved exactly or written out as SMT-LIB.

pub mod corpus;
pub mod eqsys;
pub mod gba;
pub mod graph;
pub mod ltl;
pub mod oracle;
pub mod pmc;
pub mod product;
