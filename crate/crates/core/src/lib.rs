//! Riccati foliations on the trivial projective-plane and polydisk bundles
//! over the Riemann sphere: classification of projective automorphisms by
//! fixed locus, polynomial normal-form checking, local holonomy models and
//! numerical extraction of global holonomy by lifting base loops.

pub mod classify;
pub mod holonomy;
pub mod matrix;
pub mod normal_form;
pub mod poly;
pub mod report;
