//! Uncertainty-aware trajectory prediction and risk-sensitive motion planning.
//!
//! `uapsim` is a discrete-time prediction–planning simulator. It couples a
//! Gaussian-mixture trajectory predictor that separates three kinds of
//! uncertainty — short-term aleatoric (SAU, per-step Gaussian spread),
//! long-term aleatoric (LAU, behavioral multimodality as mixture modes), and
//! epistemic (EU, disagreement across a bootstrap ensemble of submodels) —
//! with a Frenet-frame sampling planner whose risk cost is built from
//! shape-aware collision probabilities and a bounded harm model.
//!
//! The crate is organized around the planning pipeline:
//!
//! - [`scenario`]: scenario data model, JSON ingestion, footprint geometry,
//!   and limited-perception injectors (occlusion, observation noise).
//! - [`frenet`]: reference-path geometry, Cartesian↔Frenet conversion,
//!   polynomial candidate generation, and dynamic feasibility checks.
//! - [`prediction`]: the GMM regressor, wMSE/wNLL losses with analytic
//!   gradients, two-phase training, bootstrap ensembles, and displacement
//!   metrics.
//! - [`risk`]: collision probability via bivariate-normal rectangle
//!   integrals, harm, and the full family of uncertainty-aware risk
//!   aggregators up to the hierarchical comprehensive risk.
//! - [`planner`]: multi-component cost, layered collision checks, tiered
//!   trajectory selection, and the rolling-horizon closed loop.
//! - [`bench`]: synthetic scenario generation, suite execution across
//!   uncertainty modes and injectors, and CSV/JSONL result emission.
//!
//! See the crate examples for runnable entry points into each capability,
//! or the `uapsim` binary for the batch CLI (`generate`, `run`, `report`).

pub mod bench;
pub mod frenet;
pub mod geometry;
pub mod planner;
pub mod prediction;
pub mod risk;
pub mod scenario;
