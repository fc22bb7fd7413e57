//! Layered circuit templates and the built-in catalog.
//!
//! Every circuit starts with a Hadamard on each qubit, followed by
//! `n_layers` repetitions of the layer blueprint. Angles are consumed in
//! blueprint order, layer after layer.
//!
//! Catalog blueprints (qubits `0..n`, `ring1` is `i -> (i+1) mod n` for
//! `i = n-1, ..., 0`; `ring2` is `i -> (i-1) mod n` for `i = n-1, 0, 1, ..., n-2`;
//! `chain` is `i -> i-1` for `i = n-1, ..., 1`; `pairs_even` is `2m+1 -> 2m`,
//! `pairs_odd` is `2m+2 -> 2m+1`):
//!
//! | id  | layer                                                    | angles/layer |
//! |-----|----------------------------------------------------------|--------------|
//! | A1  | RX all, RZ all                                           | 2n           |
//! | A2  | RX all, RZ all, CX chain                                 | 2n           |
//! | A3  | RX all, RZ all, CRZ chain                                | 3n-1         |
//! | A4  | RX all, RZ all, CRX chain                                | 3n-1         |
//! | A5  | RX, RZ all; CRZ from every qubit to every other; RX, RZ  | n^2+3n       |
//! | A6  | as A5 with CRX                                           | n^2+3n       |
//! | A7  | RX, RZ; CRZ pairs_even; RX, RZ; CRZ pairs_odd            | 5n-1         |
//! | A8  | as A7 with CRX                                           | 5n-1         |
//! | A9  | H all, CZ chain, RX all                                  | n            |
//! | A10 | RY all, CZ ring1, RY all                                 | 2n           |
//! | A11 | RY, RZ all; CX pairs_even; RY, RZ on 1..n-1; CX pairs_odd| 4n-4         |
//! | A12 | as A11 with CZ                                           | 4n-4         |
//! | A13 | RY all, CRZ ring1, RY all, CRZ ring2                     | 4n           |
//! | A14 | RY all, CRX ring1, RY all, CRX ring2                     | 4n           |
//! | A15 | RY all, CX ring1, RY all, CX ring2                       | 2n           |
//! | A16 | RX, RZ all; CRZ pairs_even; CRZ pairs_odd                | 3n-1         |
//! | A17 | as A16 with CRX                                          | 3n-1         |
//! | A18 | RX, RZ all; CRZ ring1                                    | 3n           |
//! | A19 | RX, RZ all; CRX ring1                                    | 3n           |
//!
//! In A5/A6 the controls run `n-1` down to `0`, and for each control the
//! targets run `n-1` down to `0`, skipping the control.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::gate::Gate;
use super::state::{check_gate, StateVector};
use crate::error::{Error, Result};

/// One slot of a layer blueprint; rotation slots consume one angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    H(usize),
    Rx(usize),
    Ry(usize),
    Rz(usize),
    Crx { control: usize, target: usize },
    Crz { control: usize, target: usize },
    Cx { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl Op {
    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            Op::Rx(_) | Op::Ry(_) | Op::Rz(_) | Op::Crx { .. } | Op::Crz { .. }
        )
    }

    pub fn gate(&self, angle: f64) -> Gate {
        match *self {
            Op::H(q) => Gate::H(q),
            Op::Rx(q) => Gate::Rx(q, angle),
            Op::Ry(q) => Gate::Ry(q, angle),
            Op::Rz(q) => Gate::Rz(q, angle),
            Op::Crx { control, target } => Gate::Crx {
                control,
                target,
                angle,
            },
            Op::Crz { control, target } => Gate::Crz {
                control,
                target,
                angle,
            },
            Op::Cx { control, target } => Gate::Cx { control, target },
            Op::Cz { control, target } => Gate::Cz { control, target },
        }
    }
}

pub const CATALOG_IDS: [&str; 19] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13", "A14", "A15",
    "A16", "A17", "A18", "A19",
];

/// Closed-form angles per layer for a catalog id.
pub fn catalog_params_per_layer(id: &str, n: usize) -> Result<usize> {
    Ok(match id {
        "A1" | "A2" | "A10" | "A15" => 2 * n,
        "A3" | "A4" | "A16" | "A17" => 3 * n - 1,
        "A5" | "A6" => n * n + 3 * n,
        "A7" | "A8" => 5 * n - 1,
        "A9" => n,
        "A11" | "A12" => 4 * n - 4,
        "A13" | "A14" => 4 * n,
        "A18" | "A19" => 3 * n,
        _ => return Err(Error::UnknownAnsatz(String::from(id))),
    })
}

#[derive(Clone, Copy)]
enum Two {
    Crx,
    Crz,
    Cx,
    Cz,
}

fn two(kind: Two, control: usize, target: usize) -> Op {
    match kind {
        Two::Crx => Op::Crx { control, target },
        Two::Crz => Op::Crz { control, target },
        Two::Cx => Op::Cx { control, target },
        Two::Cz => Op::Cz { control, target },
    }
}

fn all(ops: &mut Vec<Op>, n: usize, f: fn(usize) -> Op) {
    ops.extend((0..n).map(f));
}

fn chain(ops: &mut Vec<Op>, n: usize, kind: Two) {
    ops.extend((1..n).rev().map(|i| two(kind, i, i - 1)));
}

fn ring1(ops: &mut Vec<Op>, n: usize, kind: Two) {
    ops.extend((0..n).rev().map(|i| two(kind, i, (i + 1) % n)));
}

fn ring2(ops: &mut Vec<Op>, n: usize, kind: Two) {
    let order = core::iter::once(n - 1).chain(0..n - 1);
    ops.extend(order.map(|i| two(kind, i, (i + n - 1) % n)));
}

fn pairs_even(ops: &mut Vec<Op>, n: usize, kind: Two) {
    ops.extend((0..n / 2).map(|m| two(kind, 2 * m + 1, 2 * m)));
}

fn pairs_odd(ops: &mut Vec<Op>, n: usize, kind: Two) {
    ops.extend((0..(n - 1) / 2).map(|m| two(kind, 2 * m + 2, 2 * m + 1)));
}

fn all_to_all(ops: &mut Vec<Op>, n: usize, kind: Two) {
    for c in (0..n).rev() {
        for t in (0..n).rev().filter(|&t| t != c) {
            ops.push(two(kind, c, t));
        }
    }
}

/// Layer blueprint for a catalog id on `n >= 2` qubits.
pub fn catalog_layer(id: &str, n: usize) -> Result<Vec<Op>> {
    if n < 2 {
        return Err(Error::InvalidConfig(
            "catalog ansatze need at least 2 qubits",
        ));
    }
    let mut ops = Vec::new();
    let o = &mut ops;
    let rxrz = |o: &mut Vec<Op>| {
        all(o, n, Op::Rx);
        all(o, n, Op::Rz);
    };
    match id {
        "A1" => rxrz(o),
        "A2" => {
            rxrz(o);
            chain(o, n, Two::Cx);
        }
        "A3" | "A4" => {
            rxrz(o);
            chain(o, n, if id == "A3" { Two::Crz } else { Two::Crx });
        }
        "A5" | "A6" => {
            rxrz(o);
            all_to_all(o, n, if id == "A5" { Two::Crz } else { Two::Crx });
            rxrz(o);
        }
        "A7" | "A8" => {
            let k = if id == "A7" { Two::Crz } else { Two::Crx };
            rxrz(o);
            pairs_even(o, n, k);
            rxrz(o);
            pairs_odd(o, n, k);
        }
        "A9" => {
            all(o, n, Op::H);
            chain(o, n, Two::Cz);
            all(o, n, Op::Rx);
        }
        "A10" => {
            all(o, n, Op::Ry);
            ring1(o, n, Two::Cz);
            all(o, n, Op::Ry);
        }
        "A11" | "A12" => {
            let k = if id == "A11" { Two::Cx } else { Two::Cz };
            all(o, n, Op::Ry);
            all(o, n, Op::Rz);
            pairs_even(o, n, k);
            o.extend((1..n - 1).map(Op::Ry));
            o.extend((1..n - 1).map(Op::Rz));
            pairs_odd(o, n, k);
        }
        "A13" | "A14" | "A15" => {
            let k = match id {
                "A13" => Two::Crz,
                "A14" => Two::Crx,
                _ => Two::Cx,
            };
            all(o, n, Op::Ry);
            ring1(o, n, k);
            all(o, n, Op::Ry);
            ring2(o, n, k);
        }
        "A16" | "A17" => {
            let k = if id == "A16" { Two::Crz } else { Two::Crx };
            rxrz(o);
            pairs_even(o, n, k);
            pairs_odd(o, n, k);
        }
        "A18" | "A19" => {
            rxrz(o);
            ring1(o, n, if id == "A18" { Two::Crz } else { Two::Crx });
        }
        _ => return Err(Error::UnknownAnsatz(String::from(id))),
    }
    Ok(ops)
}

/// Circuit template: ansatz id, width and depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ansatz {
    id: String,
    n_qubits: usize,
    n_layers: usize,
    layer: Vec<Op>,
    params_per_layer: usize,
}

impl Ansatz {
    pub fn catalog(id: &str, n_qubits: usize, n_layers: usize) -> Result<Self> {
        let layer = catalog_layer(id, n_qubits)?;
        Self::custom(id, n_qubits, n_layers, layer)
    }

    /// A template from an explicit layer blueprint.
    pub fn custom(id: &str, n_qubits: usize, n_layers: usize, layer: Vec<Op>) -> Result<Self> {
        if n_layers == 0 {
            return Err(Error::InvalidConfig("ansatz needs at least one layer"));
        }
        StateVector::zero(n_qubits)?;
        for op in &layer {
            check_gate(&op.gate(0.0), n_qubits)?;
        }
        let params_per_layer = layer.iter().filter(|o| o.is_parametric()).count();
        Ok(Ansatz {
            id: String::from(id),
            n_qubits,
            n_layers,
            layer,
            params_per_layer,
        })
    }

    /// Catalog ansatz sized for embedding dimension `dim = 2^n`.
    pub fn for_dimension(id: &str, dim: usize, n_layers: usize) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        Self::catalog(id, dim.trailing_zeros() as usize, n_layers)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn layer(&self) -> &[Op] {
        &self.layer
    }

    pub fn params_per_layer(&self) -> usize {
        self.params_per_layer
    }

    pub fn param_count(&self) -> usize {
        self.params_per_layer * self.n_layers
    }

    /// Same ansatz with a different depth.
    pub fn with_layers(&self, n_layers: usize) -> Result<Self> {
        Self::custom(&self.id, self.n_qubits, n_layers, self.layer.clone())
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ParamCount {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// Full gate sequence (Hadamard input layer included), each gate paired
    /// with the index of the angle it consumes.
    pub fn circuit(&self, params: &[f64]) -> Result<Vec<(Gate, Option<usize>)>> {
        self.check_params(params)?;
        let mut gates = Vec::with_capacity(self.n_qubits + self.layer.len() * self.n_layers);
        gates.extend((0..self.n_qubits).map(|q| (Gate::H(q), None)));
        let mut k = 0;
        for _ in 0..self.n_layers {
            for op in &self.layer {
                if op.is_parametric() {
                    gates.push((op.gate(params[k]), Some(k)));
                    k += 1;
                } else {
                    gates.push((op.gate(0.0), None));
                }
            }
        }
        Ok(gates)
    }

    /// Prepares `U(params) H^{(x)n} |0...0>`.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        let gates = self.circuit(params)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        for (g, _) in &gates {
            state.apply_trusted(g);
        }
        Ok(state)
    }

    pub fn describe(&self) -> String {
        format!(
            "{} ({} qubits, {} layers, {} angles)",
            self.id,
            self.n_qubits,
            self.n_layers,
            self.param_count()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn six_qubit_three_layer_counts() {
        assert_eq!(Ansatz::catalog("A14", 6, 3).unwrap().param_count(), 72);
        assert_eq!(Ansatz::catalog("A5", 6, 3).unwrap().param_count(), 162);
    }

    #[test]
    fn a14_layer_shape() {
        let layer = catalog_layer("A14", 4).unwrap();
        let crx = layer.iter().filter(|o| matches!(o, Op::Crx { .. })).count();
        let ry = layer.iter().filter(|o| matches!(o, Op::Ry(_))).count();
        assert_eq!((crx, ry), (8, 8));
        assert_eq!(
            layer[4],
            Op::Crx {
                control: 3,
                target: 0
            }
        );
        assert_eq!(
            layer[12],
            Op::Crx {
                control: 3,
                target: 2
            }
        );
        assert_eq!(
            layer[13],
            Op::Crx {
                control: 0,
                target: 3
            }
        );
    }

    #[test]
    fn a5_layer_shape() {
        let layer = catalog_layer("A5", 4).unwrap();
        let crz = layer.iter().filter(|o| matches!(o, Op::Crz { .. })).count();
        assert_eq!(crz, 12);
        assert_eq!(layer.len(), 4 * 4 + 12);
    }

    #[test]
    fn formulas_match_enumeration_for_whole_catalog() {
        for id in CATALOG_IDS {
            for n in 2..=10 {
                let a = Ansatz::catalog(id, n, 1).unwrap();
                assert_eq!(
                    a.params_per_layer(),
                    catalog_params_per_layer(id, n).unwrap(),
                    "{id} n={n}"
                );
            }
        }
    }

    #[test]
    fn unknown_id() {
        assert_eq!(
            Ansatz::catalog("A99", 4, 1),
            Err(Error::UnknownAnsatz("A99".into()))
        );
    }

    #[test]
    fn zero_angles_give_uniform_state() {
        for id in ["A5", "A14", "A13", "A19"] {
            let a = Ansatz::catalog(id, 4, 2).unwrap();
            let s = a.prepare(&vec![0.0; a.param_count()]).unwrap();
            for z in s.amplitudes() {
                assert!((z.re - 0.25).abs() < 1e-12 && z.im.abs() < 1e-12, "{id}");
            }
        }
    }

    #[test]
    fn param_length_checked() {
        let a = Ansatz::catalog("A5", 3, 1).unwrap();
        assert_eq!(
            a.prepare(&[0.0; 3]),
            Err(Error::ParamCount {
                expected: 18,
                got: 3
            })
        );
    }

    #[test]
    fn custom_single_qubit() {
        let a = Ansatz::custom("ry", 1, 1, vec![Op::Ry(0)]).unwrap();
        assert_eq!(a.param_count(), 1);
        assert!(Ansatz::custom(
            "bad",
            2,
            1,
            vec![Op::Cx {
                control: 0,
                target: 0
            }]
        )
        .is_err());
    }
}
