//! Scalar bounds shared by the numeric parts of the crate.
//!
//! Weight tables, partition functions and conditional distributions only need
//! ring operations and an ordering, so they are written against [`Scalar`] and
//! work for `f32`, `f64`, `u64` counts and exact rationals alike. Anything that
//! takes logarithms or draws random numbers needs [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {}

pub trait Real: Scalar + Float + FromPrimitive + ToPrimitive + Copy {}

impl<T> Real for T where T: Scalar + Float + FromPrimitive + ToPrimitive + Copy {}
