//! Spectral laboratory for observability, exact controllability and
//! stabilization of dispersive equations on the 1-D torus.
//!
//! The library works at a finite symmetric Fourier truncation and keeps
//! every headline quantity falsifiable:
//!
//! * [`spectral`] — truncated states, integer dispersion symbols `p(k)`,
//!   the free flow `e^{itP(D)}`, grid transforms;
//! * [`region`] — exact interval-union and rectangle-union regions with
//!   closed-form indicator transforms and tail energies;
//! * [`mass_op`] — the mass-conserving control shaping operator
//!   `ℒ(h) = (1/|F|)𝟙_F(h − ⟨h⟩_F)`, its matrix coefficients and coercivity;
//! * [`observability`] — Gram-matrix observability constants on measurable
//!   regions, coincidence counts, Strichartz ratios, thresholds, sweeps;
//! * [`hum`] — linear mass-conserved control via the HUM operator Φ;
//! * [`kdv`] — pseudospectral forced KdV integration and the Picard fixed
//!   point that upgrades linear controls to the nonlinear equation;
//! * [`damping`] — the damped flow, per-block energy identities, decay
//!   rates, Floquet modes, resolvent and mixed-norm diagnostics;
//! * [`verify`] — the seeded identity battery behind the CLI `verify`
//!   workflow;
//! * [`report`] — JSON/CSV serialization with pinned conventions.
//!
//! Conventions (fixed crate-wide): `û(k) = (1/2π)∫ u e^{-ikx} dx`, flows
//! multiply by `e^{ip(k)t}`, indicator transforms are normalized by the
//! cell volume, Gram matrices hold plain integrals. The `toruslab` binary
//! in the companion crate exposes the experiment workflows; the guide under
//! `book/` walks through the mathematics with runnable examples.

pub mod damping;
pub mod error;
pub mod hum;
pub mod kdv;
pub mod mass_op;
pub mod observability;
pub mod phase;
pub mod region;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod verify;
