use num_traits::One;
use serde_json::{json, Value};

use super::ops::{
    coefficient_capacitor, companion, controlled_transform, derivative_ideal, factor_exceptional, monomial_center,
    origin_in_cosupport, strict_transform, tangent_direction, unit_certificate, vanish_on, CompanionTag,
    ExceptionalDivisor, MarkedIdeal, TangentDirection,
};
use super::ResolutionError;
use crate::exponents::Exponent;
use crate::field::{Coeff, FieldSpec};
use crate::series::{default_names, Series, POLY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_blowups: usize,
    pub max_depth: usize,
    pub max_charts: usize,
    /// Degree cap for leaf emptiness certificates; 0 picks `2·deg·μ`.
    pub certificate_degree: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_blowups: 64, max_depth: 12, max_charts: 256, certificate_degree: 0 }
    }
}

/// `x_coord ↦ image`, applied in a chart before its center is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateChange {
    pub coord: usize,
    pub image: Series,
}

impl CoordinateChange {
    pub fn apply(&self, f: &Series) -> Series {
        let n = f.nvars();
        let images: Vec<Series> = (0..n)
            .map(|i| if i == self.coord { self.image.clone() } else { Series::variable(f.field(), n, i, POLY) })
            .collect();
        f.substitute(&images).expect("images share the chart")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Interior,
    /// `1 ∈ D^{μ−1}(I)` certified with multiples up to this degree.
    Resolved { certificate_degree: u32 },
    /// The origin left the cosupport but global emptiness was not certified.
    OriginClear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Coordinate whose chart of the parent's blow-up this is.
    pub chart_coord: Option<usize>,
    pub depth: usize,
    /// The marked ideal's generators on entering the chart.
    pub ideal: Vec<Series>,
    /// Strict transforms of the original generators on entering the chart.
    pub strict: Vec<Series>,
    pub e: Vec<ExceptionalDivisor>,
    pub changes: Vec<CoordinateChange>,
    pub center: Option<Vec<usize>>,
    /// Order of the non-exceptional factor at the origin on entry.
    pub root_order: u32,
    pub log: Vec<String>,
    pub status: NodeStatus,
    pub children: Vec<usize>,
}

impl TraceNode {
    /// The ideal after this chart's coordinate changes.
    pub fn changed_ideal(&self) -> Vec<Series> {
        apply_changes(&self.changes, &self.ideal)
    }

    pub fn changed_strict(&self) -> Vec<Series> {
        apply_changes(&self.changes, &self.strict)
    }
}

pub(crate) fn apply_changes(changes: &[CoordinateChange], gens: &[Series]) -> Vec<Series> {
    gens.iter().map(|g| changes.iter().fold(g.clone(), |acc, c| c.apply(&acc))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionTrace {
    pub n: usize,
    pub mu: u32,
    pub field: FieldSpec,
    pub nodes: Vec<TraceNode>,
    pub blowups: usize,
}

impl ResolutionTrace {
    pub fn leaves(&self) -> impl Iterator<Item = &TraceNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    pub fn max_depth(&self) -> usize {
        self.leaves().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn all_resolved(&self) -> bool {
        self.leaves().all(|n| matches!(n.status, NodeStatus::Resolved { .. }))
    }

    pub fn centers(&self) -> Vec<(usize, Vec<usize>)> {
        self.nodes.iter().filter_map(|n| n.center.clone().map(|c| (n.id, c))).collect()
    }

    fn names(&self) -> Vec<String> {
        default_names(self.n, 0)
    }

    pub fn render_center(&self, center: &[usize]) -> String {
        let names = self.names();
        format!("V({})", center.iter().map(|&i| names[i].clone()).collect::<Vec<_>>().join(", "))
    }

    pub fn to_json(&self) -> Value {
        let names = self.names();
        let render = |gens: &[Series]| gens.iter().map(|g| g.render(Some(&names))).collect::<Vec<_>>();
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                let status = match n.status {
                    NodeStatus::Interior => json!("interior"),
                    NodeStatus::Resolved { certificate_degree } => {
                        json!({"resolved": {"certificate_degree": certificate_degree}})
                    }
                    NodeStatus::OriginClear => json!("origin_clear"),
                };
                json!({
                    "id": n.id,
                    "parent": n.parent,
                    "chart": n.chart_coord.map(|c| names[c].clone()),
                    "depth": n.depth,
                    "ideal": render(&n.ideal),
                    "strict": render(&n.strict),
                    "exceptional": n.e.iter().map(|d| json!({"coord": names[d.coord], "id": d.id, "birth": d.birth})).collect::<Vec<_>>(),
                    "changes": n.changes.iter().map(|c| json!({"coord": names[c.coord], "image": c.image.render(Some(&names))})).collect::<Vec<_>>(),
                    "center": n.center.as_ref().map(|c| c.iter().map(|&i| names[i].clone()).collect::<Vec<_>>()),
                    "root_order": n.root_order,
                    "log": n.log,
                    "status": status,
                    "children": n.children,
                })
            })
            .collect();
        json!({
            "n": self.n,
            "mu": self.mu,
            "field": self.field.to_string(),
            "blowups": self.blowups,
            "max_depth": self.max_depth(),
            "resolved": self.all_resolved(),
            "nodes": nodes,
        })
    }

    /// One line per leaf: the chain of charts and centers leading to it.
    pub fn summary(&self) -> Vec<String> {
        let names = self.names();
        self.leaves()
            .map(|leaf| {
                let mut chain = Vec::new();
                let mut cur = Some(leaf.id);
                while let Some(id) = cur {
                    let node = &self.nodes[id];
                    if let Some(c) = node.chart_coord {
                        chain.push(format!("{}-chart", names[c]));
                    }
                    cur = node.parent;
                }
                chain.reverse();
                let ideal: Vec<String> = leaf.ideal.iter().map(|g| g.render(Some(&names))).collect();
                let status = match leaf.status {
                    NodeStatus::Resolved { .. } => "resolved",
                    NodeStatus::OriginClear => "origin clear (not certified)",
                    NodeStatus::Interior => "open",
                };
                let path = if chain.is_empty() { "root".to_string() } else { chain.join(" → ") };
                format!("{path}: ({}; {}) {status}", ideal.join(", "), self.mu)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Frame {
    Marked { fixed: Vec<usize>, gens: Vec<Series>, mu: u32, e: Vec<usize> },
    MaxOrder { fixed: Vec<usize>, gens: Vec<Series>, mu: u32, e_old: Vec<usize>, e_start: Vec<usize>, prefer: Vec<usize> },
}

impl Frame {
    fn fixed(&self) -> &[usize] {
        match self {
            Frame::Marked { fixed, .. } | Frame::MaxOrder { fixed, .. } => fixed,
        }
    }

    fn mu(&self) -> u32 {
        match self {
            Frame::Marked { mu, .. } | Frame::MaxOrder { mu, .. } => *mu,
        }
    }

    fn gens_mut(&mut self) -> &mut Vec<Series> {
        match self {
            Frame::Marked { gens, .. } | Frame::MaxOrder { gens, .. } => gens,
        }
    }
}

#[derive(Debug, Clone)]
struct State {
    e: Vec<ExceptionalDivisor>,
    frames: Vec<Frame>,
    ideal: Vec<Series>,
    strict: Vec<Series>,
}

impl State {
    fn coord_of(&self, id: usize) -> Option<usize> {
        self.e.iter().find(|d| d.id == id).map(|d| d.coord)
    }

    fn live_ids(&self, ids: &[usize], fixed: &[usize]) -> Vec<usize> {
        ids.iter().copied().filter(|&id| self.coord_of(id).is_some_and(|c| !fixed.contains(&c))).collect()
    }
}

enum Action {
    Pop,
    Push(Frame, String),
    Change(TangentDirection),
    Center(Vec<usize>, String),
}

struct Driver {
    limits: Limits,
    seed: u64,
    mu: u32,
    n: usize,
    names: Vec<String>,
    next_divisor: usize,
    trace: ResolutionTrace,
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl Driver {
    fn fmt_coords(&self, coords: &[usize]) -> String {
        coords.iter().map(|&i| self.names[i].as_str()).collect::<Vec<_>>().join(", ")
    }

    fn exceeded(&self, limit: String) -> ResolutionError {
        ResolutionError::LimitExceeded { limit, trace: Box::new(self.trace.clone()) }
    }

    fn decide(&self, state: &State) -> Result<Action, ResolutionError> {
        let n = self.n;
        let all: Vec<usize> = (0..n).collect();
        match state.frames.last().expect("nonempty stack") {
            Frame::Marked { fixed, gens, mu, e } => {
                if !origin_in_cosupport(gens, *mu) {
                    return Ok(Action::Pop);
                }
                if gens.iter().all(Series::is_zero) {
                    if fixed.is_empty() {
                        return Err(ResolutionError::EmptyIdeal);
                    }
                    return Ok(Action::Center(fixed.clone(), "restricted ideal vanishes on its hypersurface".into()));
                }
                if n - fixed.len() <= 1 {
                    return Ok(Action::Center(all, "isolated point on a curve".into()));
                }
                let ids = state.live_ids(e, fixed);
                let coords: Vec<usize> = ids.iter().filter_map(|&id| state.coord_of(id)).collect();
                let comp = companion(gens, *mu, &coords);
                if comp.tag == CompanionTag::NeedsMonomialStep {
                    let exps: Vec<(usize, u32, usize)> = ids
                        .iter()
                        .filter_map(|&id| state.e.iter().find(|d| d.id == id))
                        .map(|d| (d.coord, comp.factorization.monomial.get(d.coord), d.birth))
                        .collect();
                    let s = monomial_center(&exps, *mu)?;
                    let note = format!("monomial step on ({})", self.fmt_coords(&s));
                    return Ok(Action::Center(union(fixed, &s), note));
                }
                let note = format!(
                    "dim {} μ={}: ord N = {}, companion marking {}",
                    n - fixed.len(),
                    mu,
                    comp.factorization.rest_order,
                    comp.mu
                );
                Ok(Action::Push(
                    Frame::MaxOrder {
                        fixed: fixed.clone(),
                        gens: comp.generators,
                        mu: comp.mu,
                        e_old: ids,
                        e_start: state.e.iter().map(|d| d.id).collect(),
                        prefer: Vec::new(),
                    },
                    note,
                ))
            }
            Frame::MaxOrder { fixed, gens, mu, e_old, e_start, prefer } => {
                if !origin_in_cosupport(gens, *mu) {
                    return Ok(Action::Pop);
                }
                let old = state.live_ids(e_old, fixed);
                if !old.is_empty() {
                    let coords: Vec<usize> = old.iter().filter_map(|&id| state.coord_of(id)).collect();
                    let mut g = gens.clone();
                    for &c in &coords {
                        let mut power = Exponent::zero(n);
                        power.set(c, *mu);
                        g.push(Series::monomial(gens[0].field(), power, Coeff::one(), POLY));
                    }
                    let note = format!("moving the cosupport off ({})", self.fmt_coords(&coords));
                    return Ok(Action::Push(
                        Frame::MaxOrder {
                            fixed: fixed.clone(),
                            gens: g,
                            mu: *mu,
                            e_old: Vec::new(),
                            e_start: state.e.iter().map(|d| d.id).collect(),
                            prefer: old,
                        },
                        note,
                    ));
                }
                let d = n - fixed.len();
                if d == 0 {
                    return Ok(Action::Center(all, "point".into()));
                }
                let e_coords: Vec<usize> = state.e.iter().map(|d| d.coord).filter(|c| !fixed.contains(c)).collect();
                let prefer_coords: Vec<usize> = prefer.iter().filter_map(|&id| state.coord_of(id)).collect();
                let td = tangent_direction(gens, *mu, fixed, &e_coords, &prefer_coords, self.seed)?;
                if td.replacement.is_some() {
                    return Ok(Action::Change(td));
                }
                let h = union(fixed, &[td.coord]);
                if d - 1 <= 1 {
                    let der = derivative_ideal(gens, mu - 1);
                    return Ok(if vanish_on(&der, &h) {
                        Action::Center(h.clone(), format!("cosupport contains V({})", self.fmt_coords(&h)))
                    } else {
                        Action::Center(all, format!("isolated in V({})", self.fmt_coords(&h)))
                    });
                }
                let (cap, c) = coefficient_capacitor(gens, *mu, &h)?;
                let e_new: Vec<usize> = state
                    .e
                    .iter()
                    .filter(|d| !e_start.contains(&d.id) && !h.contains(&d.coord))
                    .map(|d| d.id)
                    .collect();
                let note = format!("restrict to V({}): {} generators marked {c}", self.fmt_coords(&h), cap.len());
                Ok(Action::Push(Frame::Marked { fixed: h, gens: cap, mu: c, e: e_new }, note))
            }
        }
    }

    fn new_node(&mut self, state: &State, parent: Option<usize>, chart_coord: Option<usize>, depth: usize) -> usize {
        let id = self.trace.nodes.len();
        let coords: Vec<usize> = state.e.iter().map(|d| d.coord).collect();
        let root_order = factor_exceptional(&state.ideal, &coords).rest_order;
        self.trace.nodes.push(TraceNode {
            id,
            parent,
            chart_coord,
            depth,
            ideal: state.ideal.clone(),
            strict: state.strict.clone(),
            e: state.e.clone(),
            changes: Vec::new(),
            center: None,
            root_order,
            log: Vec::new(),
            status: NodeStatus::Interior,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            self.trace.nodes[p].children.push(id);
        }
        id
    }

    fn certificate_cap(&self, ideal: &[Series]) -> u32 {
        if self.limits.certificate_degree > 0 {
            return self.limits.certificate_degree;
        }
        let deg = ideal.iter().filter_map(|g| g.terms().map(|(e, _)| e.degree()).max()).max().unwrap_or(1);
        (2 * deg * self.mu).clamp(4, 16)
    }

    fn run_chart(&mut self, mut state: State, node: usize) -> Result<(), ResolutionError> {
        const STEPS: usize = 400;
        for _ in 0..STEPS {
            if state.frames.is_empty() {
                let der = derivative_ideal(&state.ideal, self.mu - 1);
                let cap = self.certificate_cap(&state.ideal);
                self.trace.nodes[node].status = match unit_certificate(&der, cap) {
                    Some(certificate_degree) => NodeStatus::Resolved { certificate_degree },
                    None => NodeStatus::OriginClear,
                };
                return Ok(());
            }
            match self.decide(&state)? {
                Action::Pop => {
                    state.frames.pop();
                }
                Action::Push(frame, note) => {
                    self.trace.nodes[node].log.push(note);
                    state.frames.push(frame);
                }
                Action::Change(td) => {
                    let change = CoordinateChange { coord: td.coord, image: td.replacement.expect("change requested") };
                    self.trace.nodes[node].log.push(format!(
                        "maximal contact {}: {} ↦ {}",
                        td.u.render(Some(&self.names)),
                        self.names[td.coord],
                        change.image.render(Some(&self.names))
                    ));
                    for f in &mut state.frames {
                        let g = f.gens_mut();
                        *g = g.iter().map(|s| change.apply(s)).collect();
                    }
                    state.ideal = state.ideal.iter().map(|s| change.apply(s)).collect();
                    state.strict = state.strict.iter().map(|s| change.apply(s)).collect();
                    self.trace.nodes[node].changes.push(change);
                }
                Action::Center(center, note) => {
                    let line = format!("center V({}): {note}", self.fmt_coords(&center));
                    self.trace.nodes[node].log.push(line);
                    self.trace.nodes[node].center = Some(center.clone());
                    return self.blow_up(state, node, &center);
                }
            }
        }
        Err(self.exceeded(format!("{STEPS} steps in one chart")))
    }

    fn blow_up(&mut self, state: State, node: usize, center: &[usize]) -> Result<(), ResolutionError> {
        self.trace.blowups += 1;
        if self.trace.blowups > self.limits.max_blowups {
            return Err(self.exceeded(format!("more than {} blow-ups", self.limits.max_blowups)));
        }
        let depth = self.trace.nodes[node].depth + 1;
        if depth > self.limits.max_depth {
            return Err(self.exceeded(format!("depth above {}", self.limits.max_depth)));
        }
        let new_id = self.next_divisor;
        self.next_divisor += 1;
        for &j in center {
            if self.trace.nodes.len() >= self.limits.max_charts {
                return Err(self.exceeded(format!("more than {} charts", self.limits.max_charts)));
            }
            let child = chart_state(&state, center, j, new_id, depth)?;
            let id = self.new_node(&child, Some(node), Some(j), depth);
            self.run_chart(child, id)?;
        }
        Ok(())
    }
}

fn chart_state(state: &State, center: &[usize], j: usize, new_id: usize, depth: usize) -> Result<State, ResolutionError> {
    let mut e: Vec<ExceptionalDivisor> = state.e.iter().filter(|d| d.coord != j).cloned().collect();
    e.push(ExceptionalDivisor { coord: j, id: new_id, birth: depth });
    let mut frames = Vec::new();
    for f in &state.frames {
        if f.fixed().contains(&j) {
            break;
        }
        let mut f = f.clone();
        let mu = f.mu();
        let g = f.gens_mut();
        *g = controlled_transform(g, mu, center, j)?;
        if let Frame::Marked { e, .. } = &mut f {
            e.push(new_id);
        }
        frames.push(f);
    }
    let mu = match state.frames.first() {
        Some(Frame::Marked { mu, .. }) => *mu,
        _ => unreachable!("the bottom frame is the input"),
    };
    Ok(State {
        e,
        frames,
        ideal: controlled_transform(&state.ideal, mu, center, j)?,
        strict: strict_transform(&state.strict, center, j),
    })
}

/// Runs the driver from the chart origin; every chart is processed at its origin.
pub fn resolve_marked(m: &MarkedIdeal, limits: Limits, seed: u64) -> Result<ResolutionTrace, ResolutionError> {
    if !m.field().is_char_zero() {
        return Err(ResolutionError::Unsupported("resolution needs characteristic zero".into()));
    }
    if m.n > 3 {
        return Err(ResolutionError::Unsupported(format!("ambient dimension {} > 3", m.n)));
    }
    let state = State {
        e: m.e.clone(),
        frames: vec![Frame::Marked {
            fixed: Vec::new(),
            gens: m.generators.clone(),
            mu: m.mu,
            e: m.e.iter().map(|d| d.id).collect(),
        }],
        ideal: m.generators.clone(),
        strict: m.generators.clone(),
    };
    let mut driver = Driver {
        limits,
        seed,
        mu: m.mu,
        n: m.n,
        names: default_names(m.n, 0),
        next_divisor: m.e.iter().map(|d| d.id + 1).max().unwrap_or(0),
        trace: ResolutionTrace { n: m.n, mu: m.mu, field: m.field(), nodes: Vec::new(), blowups: 0 },
    };
    let root = driver.new_node(&state, None, None, 0);
    driver.run_chart(state, root)?;
    Ok(driver.trace)
}
