//! Circuit graphs, admissible contraction orders and gate-error budgets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::algo::{connected_components, is_cyclic_directed};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gate_error::{gate_certificate, GateErrorCertificate};
use crate::gkp_states::GkpParams;
use crate::matrix_elements::{FourierConvention, GateSpec};
use crate::numerics::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Output,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u32,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: u32,
    pub src: u32,
    pub dst: u32,
    pub dim: u64,
}

/// Gate attached to an interior vertex: either parameters to certify or an explicit bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GkpParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<GateErrorCertificate>,
}

impl GateEntry {
    /// Upper bound used in the budget.
    pub fn upper(&self) -> Option<f64> {
        self.bound.or(self.certificate.as_ref().map(|c| c.upper))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub order: Vec<u32>,
    #[serde(default)]
    pub gates: BTreeMap<u32, GateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<String>,
}

/// Parse a gate label: `X`, `X^n`, `Z`, `Z^m`, `F`, `P`, `I`.
pub fn parse_gate(label: &str) -> Result<GateSpec> {
    let s = label.trim();
    let power = |rest: &str| -> Result<i64> {
        rest.strip_prefix('^')
            .ok_or_else(|| Error::Domain(format!("bad gate label {label:?}")))?
            .parse::<i64>()
            .map_err(|_| Error::Domain(format!("bad gate exponent in {label:?}")))
    };
    match s {
        "X" => Ok(GateSpec::PauliX),
        "Z" => Ok(GateSpec::PauliZPower(1)),
        "F" => Ok(GateSpec::Fourier),
        "P" => Ok(GateSpec::Phase),
        "I" => Ok(GateSpec::PauliXPower(0)),
        _ if s.starts_with('X') => {
            let n = power(&s[1..])?;
            u32::try_from(n).map(GateSpec::PauliXPower).map_err(|_| Error::Domain(format!("negative X power in {label:?}")))
        }
        _ if s.starts_with('Z') => Ok(GateSpec::PauliZPower(power(&s[1..])?)),
        _ => domain(format!("unknown gate {label:?}")),
    }
}

struct Index<'a> {
    roles: HashMap<u32, Role>,
    in_edges: HashMap<u32, Vec<&'a Edge>>,
    out_edges: HashMap<u32, Vec<&'a Edge>>,
}

impl<'a> Index<'a> {
    fn new(g: &'a CircuitGraph) -> Self {
        let roles = g.vertices.iter().map(|v| (v.id, v.role)).collect();
        let mut in_edges: HashMap<u32, Vec<&Edge>> = HashMap::new();
        let mut out_edges: HashMap<u32, Vec<&Edge>> = HashMap::new();
        for e in &g.edges {
            in_edges.entry(e.dst).or_default().push(e);
            out_edges.entry(e.src).or_default().push(e);
        }
        Self { roles, in_edges, out_edges }
    }

    fn ins(&self, v: u32) -> &[&'a Edge] {
        self.in_edges.get(&v).map_or(&[], |x| x.as_slice())
    }

    fn outs(&self, v: u32) -> &[&'a Edge] {
        self.out_edges.get(&v).map_or(&[], |x| x.as_slice())
    }
}

impl CircuitGraph {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad circuit JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn interior(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.vertices.iter().filter(|v| v.role == Role::Interior).map(|v| v.id).collect();
        v.sort_unstable();
        v
    }

    fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut ids = BTreeSet::new();
        for v in &self.vertices {
            if !ids.insert(v.id) {
                errors.push(format!("vertex {} declared twice", v.id));
            }
        }
        let mut eids = BTreeSet::new();
        for e in &self.edges {
            if !eids.insert(e.id) {
                errors.push(format!("edge {} declared twice", e.id));
            }
            if !ids.contains(&e.src) || !ids.contains(&e.dst) {
                errors.push(format!("edge {} references an unknown vertex ({} -> {})", e.id, e.src, e.dst));
            }
            if e.dim < 2 {
                errors.push(format!("edge {} has dimension {} < 2", e.id, e.dim));
            }
        }
        if self.vertices.is_empty() {
            errors.push("graph has no vertices".into());
        }
        errors
    }

    fn petgraph(&self) -> DiGraph<u32, u32> {
        let mut g = DiGraph::new();
        let nodes: HashMap<u32, NodeIndex> = self.vertices.iter().map(|v| (v.id, g.add_node(v.id))).collect();
        for e in &self.edges {
            if let (Some(&a), Some(&b)) = (nodes.get(&e.src), nodes.get(&e.dst)) {
                g.add_edge(a, b, e.id);
            }
        }
        g
    }

    /// Check every invariant, replaying the declared order.
    pub fn validate(&self) -> ValidationReport {
        let mut errors = self.structural_errors();
        if errors.is_empty() {
            let g = self.petgraph();
            if is_cyclic_directed(&g) {
                errors.push("graph contains a directed cycle".into());
            }
            if connected_components(&g) != 1 {
                errors.push("graph is not connected".into());
            }
            let idx = Index::new(self);
            for v in &self.vertices {
                let (ins, outs) = (idx.ins(v.id), idx.outs(v.id));
                match v.role {
                    Role::Input if ins.len() != 0 || outs.len() != 1 => errors.push(format!(
                        "input vertex {} has in/out degree {}/{} (expected 0/1)",
                        v.id,
                        ins.len(),
                        outs.len()
                    )),
                    Role::Output if ins.len() != 1 || outs.len() != 0 => errors.push(format!(
                        "output vertex {} has in/out degree {}/{} (expected 1/0)",
                        v.id,
                        ins.len(),
                        outs.len()
                    )),
                    Role::Interior => {
                        if ins.is_empty() || outs.is_empty() {
                            errors.push(format!("interior vertex {} needs in- and out-edges", v.id));
                        } else {
                            let din: Option<u64> = ins.iter().try_fold(1u64, |a, e| a.checked_mul(e.dim));
                            let dout: Option<u64> = outs.iter().try_fold(1u64, |a, e| a.checked_mul(e.dim));
                            if din != dout || din.is_none() {
                                errors.push(format!(
                                    "interior vertex {}: in-edge dimension {} differs from out-edge dimension {}",
                                    v.id,
                                    din.map_or("overflow".into(), |x| x.to_string()),
                                    dout.map_or("overflow".into(), |x| x.to_string())
                                ));
                            }
                        }
                    }
                    _ => {}
                }
            }
            for id in self.gates.keys() {
                if idx.roles.get(id) != Some(&Role::Interior) {
                    errors.push(format!("gate attached to non-interior vertex {id}"));
                }
            }
            if errors.is_empty() {
                errors.extend(self.order_errors(&self.order));
            }
        }
        ValidationReport { valid: errors.is_empty(), errors }
    }

    /// Replays the contraction: each `v_t` must lie in the in-boundary of `G^{(t-1)}`.
    fn order_errors(&self, order: &[u32]) -> Vec<String> {
        let mut errors = Vec::new();
        let interior: BTreeSet<u32> = self.interior().into_iter().collect();
        let declared: BTreeSet<u32> = order.iter().copied().collect();
        if declared.len() != order.len() {
            errors.push("order repeats a vertex".into());
        }
        for v in interior.difference(&declared) {
            errors.push(format!("interior vertex {v} missing from order"));
        }
        for v in declared.difference(&interior) {
            errors.push(format!("order lists non-interior vertex {v}"));
        }
        if !errors.is_empty() {
            return errors;
        }
        let idx = Index::new(self);
        let mut from_input: BTreeSet<u32> =
            self.edges.iter().filter(|e| idx.roles.get(&e.src) == Some(&Role::Input)).map(|e| e.id).collect();
        for (t, &v) in order.iter().enumerate() {
            if let Some(e) = idx.ins(v).iter().find(|e| !from_input.contains(&e.id)) {
                errors.push(format!(
                    "order position {}: vertex {v} is not in the in-boundary (edge {} comes from vertex {})",
                    t + 1,
                    e.id,
                    e.src
                ));
                return errors;
            }
            from_input.extend(idx.outs(v).iter().map(|e| e.id));
        }
        errors
    }

    /// One admissible order by in-boundary peeling, ties broken by ascending id.
    pub fn derive_order(&self) -> Result<Vec<u32>> {
        let errors = self.structural_errors();
        if !errors.is_empty() {
            return Err(Error::Structure(errors.join("; ")));
        }
        let idx = Index::new(self);
        let mut remaining: BTreeSet<u32> = self.interior().into_iter().collect();
        let mut from_input: BTreeSet<u32> =
            self.edges.iter().filter(|e| idx.roles.get(&e.src) == Some(&Role::Input)).map(|e| e.id).collect();
        let mut order = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let next = remaining
                .iter()
                .copied()
                .find(|&v| idx.ins(v).iter().all(|e| from_input.contains(&e.id)))
                .ok_or_else(|| {
                    Error::Structure(format!("no interior vertex is in the in-boundary; stuck on {:?}", remaining))
                })?;
            remaining.remove(&next);
            from_input.extend(idx.outs(next).iter().map(|e| e.id));
            order.push(next);
        }
        Ok(order)
    }

    /// Fill missing bounds by certifying each gate from its parameters.
    pub fn certify_gates(&mut self, convention: FourierConvention, tol: &Tolerance) -> Result<()> {
        for (id, entry) in self.gates.iter_mut() {
            if entry.bound.is_some() || entry.certificate.is_some() {
                continue;
            }
            let Some(p) = entry.params else {
                return domain(format!("vertex {id}: gate {} has neither params nor bound", entry.gate));
            };
            let gate = parse_gate(&entry.gate)?;
            entry.certificate = Some(gate_certificate(gate, &p, convention, tol)?);
        }
        Ok(())
    }

    /// `Σ_t err_{v_t}` over interior vertices using per-gate upper bounds.
    pub fn total_budget(&self) -> Result<f64> {
        let mut total = 0.0;
        for v in self.interior() {
            let entry = self.gates.get(&v).ok_or_else(|| Error::Domain(format!("vertex {v} has no gate")))?;
            let upper = entry
                .upper()
                .ok_or_else(|| Error::Domain(format!("vertex {v} has no certificate or bound")))?;
            if !(upper >= 0.0) {
                return domain(format!("vertex {v} has invalid bound {upper}"));
            }
            total += upper;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_labels() {
        assert_eq!(parse_gate("X").unwrap(), GateSpec::PauliX);
        assert_eq!(parse_gate("X^3").unwrap(), GateSpec::PauliXPower(3));
        assert_eq!(parse_gate("Z^-1").unwrap(), GateSpec::PauliZPower(-1));
        assert_eq!(parse_gate("I").unwrap(), GateSpec::PauliXPower(0));
        assert!(parse_gate("Y").is_err());
        assert!(parse_gate("X^-1").is_err());
    }
}
