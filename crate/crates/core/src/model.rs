//! Signed network, vertex attributes and the local probabilistic primitives.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;

/// Attempts at rejection sampling before falling back to an exact scan.
const REJECTION_TRIES: usize = 64;

/// Stable vertex handle. Ids are never reused within a network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeSign {
    Negative,
    Neutral,
    Positive,
}

impl EdgeSign {
    pub fn value(self) -> i8 {
        match self {
            EdgeSign::Negative => -1,
            EdgeSign::Neutral => 0,
            EdgeSign::Positive => 1,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            -1 => Some(EdgeSign::Negative),
            0 => Some(EdgeSign::Neutral),
            1 => Some(EdgeSign::Positive),
            _ => None,
        }
    }
}

/// Relative weights of positive (`a`), negative (`b`) and neutral (`c`) links.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignCounts {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SignCounts {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        SignCounts { a, b, c }
    }

    pub fn validate(&self) -> Result<()> {
        let all_valid = [self.a, self.b, self.c]
            .iter()
            .all(|x| x.is_finite() && *x >= 0.0);
        if !all_valid {
            return Err(Error::InvalidConfig(alloc::format!(
                "sign counts must be finite and non-negative, got ({}, {}, {})",
                self.a,
                self.b,
                self.c
            )));
        }
        if self.a + self.b + self.c <= 0.0 {
            return Err(Error::InvalidConfig(
                "sign counts a + b + c must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Converts relative link counts into the compatibility `g` and contradiction
/// `h` factors. The neutral probability is `1 - g - h`.
pub fn sign_probs_from_counts(counts: SignCounts) -> Result<(f64, f64)> {
    counts.validate()?;
    let total = counts.a + counts.b + counts.c;
    Ok((counts.a / total, counts.b / total))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexAttrs {
    /// Multiplier on attachment and walk probabilities. Any non-negative value.
    pub fitness: f64,
    /// Probability that a link built by this vertex is positive.
    pub g: f64,
    /// Probability that a link built by this vertex is negative.
    pub h: f64,
    /// Insertion index of the input that created the vertex.
    pub ordinal: u32,
}

impl VertexAttrs {
    pub fn new(fitness: f64, g: f64, h: f64, ordinal: u32) -> Result<Self> {
        let attrs = VertexAttrs {
            fitness,
            g,
            h,
            ordinal,
        };
        attrs.validate()?;
        Ok(attrs)
    }

    pub fn from_counts(fitness: f64, counts: SignCounts, ordinal: u32) -> Result<Self> {
        let (g, h) = sign_probs_from_counts(counts)?;
        Self::new(fitness, g, h, ordinal)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fitness.is_finite() && self.fitness >= 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "fitness must be finite and non-negative, got {}",
                self.fitness
            )));
        }
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        // Small slack: g and h are usually computed as ratios.
        if !(in_unit(self.g) && in_unit(self.h) && self.g + self.h <= 1.0 + 1e-12) {
            return Err(Error::InvalidConfig(alloc::format!(
                "sign probabilities must satisfy g, h >= 0 and g + h <= 1, got g={} h={}",
                self.g,
                self.h
            )));
        }
        Ok(())
    }

    pub fn neutral_prob(&self) -> f64 {
        (1.0 - self.g - self.h).max(0.0)
    }
}

/// Draws the sign of a link built by a vertex with the given attributes.
/// Consumes exactly one uniform variate.
pub fn draw_sign<R: Rng + ?Sized>(attrs: &VertexAttrs, rng: &mut R) -> EdgeSign {
    let u: f64 = rng.gen();
    if u < attrs.g {
        EdgeSign::Positive
    } else if u < attrs.g + attrs.h {
        EdgeSign::Negative
    } else {
        EdgeSign::Neutral
    }
}

/// One endpoint's view of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub to: VertexId,
    pub sign: EdgeSign,
}

#[derive(Clone, Debug)]
struct Vertex {
    attrs: VertexAttrs,
    links: Vec<Link>,
    negatives: u32,
}

/// Undirected simple graph with signed edges and per-vertex attributes.
///
/// Besides the adjacency lists the network keeps two sum trees indexed by
/// vertex id, one over `fitness * degree` for preferential attachment and one
/// over `degree` for drawing a uniformly random edge.
#[derive(Clone, Debug)]
pub struct SignedNetwork {
    tolerance: f64,
    slots: Vec<Option<Vertex>>,
    vertex_count: usize,
    edge_count: usize,
    attach: Fenwick,
    degrees: Fenwick,
    /// Vertices with `fitness * degree > 0`.
    weighted: usize,
}

impl SignedNetwork {
    pub fn new(tolerance: f64) -> Result<Self> {
        check_tolerance(tolerance)?;
        Ok(SignedNetwork {
            tolerance,
            slots: Vec::new(),
            vertex_count: 0,
            edge_count: 0,
            attach: Fenwick::default(),
            degrees: Fenwick::default(),
            weighted: 0,
        })
    }

    /// Negativity tolerance `H`.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn set_tolerance(&mut self, tolerance: f64) -> Result<()> {
        check_tolerance(tolerance)?;
        self.tolerance = tolerance;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count == 0
    }

    /// One past the largest id ever allocated.
    pub fn id_bound(&self) -> usize {
        self.slots.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertex(v).is_some()
    }

    fn vertex(&self, v: VertexId) -> Option<&Vertex> {
        self.slots.get(v.index()).and_then(Option::as_ref)
    }

    fn vertex_mut(&mut self, v: VertexId) -> Option<&mut Vertex> {
        self.slots.get_mut(v.index()).and_then(Option::as_mut)
    }

    pub fn attrs(&self, v: VertexId) -> Option<&VertexAttrs> {
        self.vertex(v).map(|x| &x.attrs)
    }

    pub fn fitness(&self, v: VertexId) -> f64 {
        self.vertex(v).map_or(0.0, |x| x.attrs.fitness)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertex(v).map_or(0, |x| x.links.len())
    }

    pub fn negative_links(&self, v: VertexId) -> usize {
        self.vertex(v).map_or(0, |x| x.negatives as usize)
    }

    pub fn links(&self, v: VertexId) -> &[Link] {
        self.vertex(v).map_or(&[], |x| &x.links)
    }

    pub fn sign(&self, u: VertexId, v: VertexId) -> Option<EdgeSign> {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.links(a).iter().find(|l| l.to == b).map(|l| l.sign)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.sign(u, v).is_some()
    }

    /// Live vertex ids in ascending order.
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| VertexId(i as u32))
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &VertexAttrs)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|x| (VertexId(i as u32), &x.attrs)))
    }

    /// Every edge once, as `(u, v, sign)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, EdgeSign)> + '_ {
        self.vertices().flat_map(move |(u, _)| {
            self.links(u)
                .iter()
                .filter(move |l| u < l.to)
                .map(move |l| (u, l.to, l.sign))
        })
    }

    /// Adds a vertex under the next free id.
    pub fn add_vertex(&mut self, attrs: VertexAttrs) -> VertexId {
        let id = VertexId(self.slots.len() as u32);
        self.slots.push(None);
        self.attach.push(0.0);
        self.degrees.push(0.0);
        self.fill_slot(id, attrs);
        id
    }

    /// Adds a vertex under a caller-chosen id, e.g. when loading a dump.
    pub fn insert_vertex(&mut self, id: VertexId, attrs: VertexAttrs) -> Result<()> {
        attrs.validate()?;
        if self.contains(id) {
            return Err(Error::VertexExists(id));
        }
        while self.slots.len() <= id.index() {
            self.slots.push(None);
            self.attach.push(0.0);
            self.degrees.push(0.0);
        }
        self.fill_slot(id, attrs);
        Ok(())
    }

    fn fill_slot(&mut self, id: VertexId, attrs: VertexAttrs) {
        self.slots[id.index()] = Some(Vertex {
            attrs,
            links: Vec::new(),
            negatives: 0,
        });
        self.vertex_count += 1;
    }

    fn refresh_weights(&mut self, v: VertexId) {
        let (fitness, degree) = match self.vertex(v) {
            Some(x) => (x.attrs.fitness, x.links.len()),
            None => (0.0, 0),
        };
        let weight = fitness * degree as f64;
        let was_weighted = self.attach.weight(v.index()) > 0.0;
        self.attach.set(v.index(), weight);
        self.degrees.set(v.index(), degree as f64);
        match (was_weighted, weight > 0.0) {
            (false, true) => self.weighted += 1,
            (true, false) => self.weighted -= 1,
            _ => {}
        }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, sign: EdgeSign) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for x in [u, v] {
            if !self.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
        }
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        for (a, b) in [(u, v), (v, u)] {
            let vertex = self.vertex_mut(a).expect("checked above");
            vertex.links.push(Link { to: b, sign });
            if sign == EdgeSign::Negative {
                vertex.negatives += 1;
            }
        }
        self.edge_count += 1;
        self.refresh_weights(u);
        self.refresh_weights(v);
        Ok(())
    }

    pub(crate) fn set_sign(&mut self, u: VertexId, v: VertexId, sign: EdgeSign) {
        for (a, b) in [(u, v), (v, u)] {
            let vertex = self.vertex_mut(a).expect("edge endpoint exists");
            let link = vertex
                .links
                .iter_mut()
                .find(|l| l.to == b)
                .expect("edge exists");
            let old = core::mem::replace(&mut link.sign, sign);
            if old == EdgeSign::Negative {
                vertex.negatives -= 1;
            }
            if sign == EdgeSign::Negative {
                vertex.negatives += 1;
            }
        }
    }

    /// Removes the edge without touching its endpoints.
    fn unlink(&mut self, u: VertexId, v: VertexId) -> Option<EdgeSign> {
        let mut sign = None;
        for (a, b) in [(u, v), (v, u)] {
            let vertex = self.vertex_mut(a)?;
            let pos = vertex.links.iter().position(|l| l.to == b)?;
            let link = vertex.links.swap_remove(pos);
            if link.sign == EdgeSign::Negative {
                vertex.negatives -= 1;
            }
            sign = Some(link.sign);
        }
        self.edge_count -= 1;
        self.refresh_weights(u);
        self.refresh_weights(v);
        sign
    }

    fn drop_vertex(&mut self, v: VertexId) {
        debug_assert_eq!(self.degree(v), 0);
        self.slots[v.index()] = None;
        self.vertex_count -= 1;
        self.refresh_weights(v);
    }

    fn vanish_if_isolated(&mut self, v: VertexId, removed: &mut Vec<VertexId>) {
        if self.contains(v) && self.degree(v) == 0 {
            self.drop_vertex(v);
            removed.push(v);
        }
    }

    /// Removes an edge. Endpoints left without links vanish; their ids are
    /// returned.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<Vec<VertexId>> {
        self.unlink(u, v).ok_or(Error::MissingEdge(u, v))?;
        let mut removed = Vec::new();
        self.vanish_if_isolated(u, &mut removed);
        self.vanish_if_isolated(v, &mut removed);
        Ok(removed)
    }

    /// Deletes `v` and its edges. Neighbours left without links vanish too.
    /// Returns every removed id, `v` first.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<Vec<VertexId>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        let mut removed = self.detach(v);
        self.drop_vertex(v);
        removed.insert(0, v);
        Ok(removed)
    }

    /// Clears every edge of `v` but keeps `v` itself, leaving it isolated as
    /// the pending input of the current cycle. Neighbours left without links
    /// vanish; their ids are returned.
    pub fn detach(&mut self, v: VertexId) -> Vec<VertexId> {
        let neighbours: Vec<VertexId> = self.links(v).iter().map(|l| l.to).collect();
        let mut removed = Vec::new();
        for n in neighbours {
            self.unlink(v, n);
            self.vanish_if_isolated(n, &mut removed);
        }
        removed
    }

    /// Removes every edge of `v` without the vanishing rule: used to roll back
    /// a rejected First Linking attempt, whose targets had links of their own
    /// before the attempt (or were the isolated seed).
    pub(crate) fn retract(&mut self, v: VertexId) {
        let neighbours: Vec<VertexId> = self.links(v).iter().map(|l| l.to).collect();
        for n in neighbours {
            self.unlink(v, n);
        }
    }

    /// Ejection test: true when the share of negative links of `j` exceeds the
    /// tolerance. A vertex without links is never killed by this test.
    pub fn killing(&self, j: VertexId) -> bool {
        let degree = self.degree(j);
        if degree == 0 {
            return false;
        }
        self.negative_links(j) as f64 / degree as f64 > self.tolerance
    }

    /// Exact attachment distribution for a new link of `i`.
    ///
    /// Candidates are all vertices other than `i` that are not yet adjacent to
    /// it. Weights are `fitness * degree`; when no candidate carries such
    /// weight (no edges yet) they fall back to `fitness`, and to uniform when
    /// every candidate has zero fitness. Probabilities are listed in ascending
    /// id order and sum to one; the result is empty without candidates.
    pub fn attachment_weights(&self, i: VertexId) -> Vec<(VertexId, f64)> {
        let candidates: Vec<(VertexId, f64, usize)> = self
            .vertices()
            .filter(|(t, _)| *t != i && !self.has_edge(i, *t))
            .map(|(t, a)| (t, a.fitness, self.degree(t)))
            .collect();
        let preferential: f64 = candidates.iter().map(|(_, f, k)| f * *k as f64).sum();
        let by_fitness: f64 = candidates.iter().map(|(_, f, _)| f).sum();
        let n = candidates.len() as f64;
        candidates
            .iter()
            .map(|&(t, f, k)| {
                let p = if preferential > 0.0 {
                    f * k as f64 / preferential
                } else if by_fitness > 0.0 {
                    f / by_fitness
                } else {
                    1.0 / n
                };
                (t, p)
            })
            .collect()
    }

    /// Draws one target from [`Self::attachment_weights`] for vertex `i`.
    ///
    /// Uses the `fitness * degree` sum tree with rejection of `i` and its
    /// neighbours; degenerate cases go through the exact distribution.
    pub fn sample_attachment_target<R: Rng + ?Sized>(
        &self,
        i: VertexId,
        rng: &mut R,
    ) -> Option<VertexId> {
        let mut excluded = usize::from(self.attach_weight(i) > 0.0);
        excluded += self
            .links(i)
            .iter()
            .filter(|l| self.attach_weight(l.to) > 0.0)
            .count();
        if self.weighted > excluded {
            let total = self.attach.total();
            for _ in 0..REJECTION_TRIES {
                let target = rng.gen::<f64>() * total;
                let t = VertexId(self.attach.find(target) as u32);
                if t != i && self.attach_weight(t) > 0.0 && !self.has_edge(i, t) {
                    return Some(t);
                }
            }
        }
        sample_discrete(&self.attachment_weights(i), rng)
    }

    fn attach_weight(&self, v: VertexId) -> f64 {
        if v.index() < self.attach.len() {
            self.attach.weight(v.index())
        } else {
            0.0
        }
    }

    /// Forgets `min(count, edges)` uniformly chosen edges. Vertices losing
    /// their last link vanish. Returns the number of edges removed.
    pub fn forget_edges<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> usize {
        let mut vanished = Vec::new();
        self.forget_edges_sparing(count, None, rng, &mut vanished)
    }

    /// Like [`Self::forget_edges`], but edges incident to `spare` are never
    /// chosen. Vanished vertices are appended to `vanished`.
    pub fn forget_edges_sparing<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        spare: Option<VertexId>,
        rng: &mut R,
        vanished: &mut Vec<VertexId>,
    ) -> usize {
        let spared = spare.map_or(0, |s| self.degree(s));
        let eligible = self.edge_count - spared;
        let target = count.min(eligible);
        for _ in 0..target {
            let (u, v) = self.random_edge(spare, rng);
            self.unlink(u, v);
            self.vanish_if_isolated(u, vanished);
            self.vanish_if_isolated(v, vanished);
        }
        target
    }

    /// Uniform edge not incident to `spare`. At least one such edge must exist.
    fn random_edge<R: Rng + ?Sized>(
        &self,
        spare: Option<VertexId>,
        rng: &mut R,
    ) -> (VertexId, VertexId) {
        let total = self.degrees.total();
        for _ in 0..REJECTION_TRIES {
            let u = VertexId(self.degrees.find(rng.gen::<f64>() * total) as u32);
            let links = self.links(u);
            if links.is_empty() {
                continue;
            }
            let link = links[rng.gen_range(0..links.len())];
            if Some(u) != spare && Some(link.to) != spare {
                return (u, link.to);
            }
        }
        let eligible: Vec<(VertexId, VertexId)> = self
            .edges()
            .filter(|(u, v, _)| Some(*u) != spare && Some(*v) != spare)
            .map(|(u, v, _)| (u, v))
            .collect();
        eligible[rng.gen_range(0..eligible.len())]
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn check_invariants(&self) -> core::result::Result<(), alloc::string::String> {
        let mut edges = 0;
        let mut live = 0;
        for (u, _) in self.vertices() {
            live += 1;
            let links = self.links(u);
            for (pos, l) in links.iter().enumerate() {
                if l.to == u {
                    return Err(alloc::format!("self-loop at {u}"));
                }
                if links[..pos].iter().any(|x| x.to == l.to) {
                    return Err(alloc::format!("parallel edge {u}-{}", l.to));
                }
                let back = self.links(l.to).iter().find(|x| x.to == u);
                match back {
                    Some(b) if b.sign == l.sign => {}
                    _ => return Err(alloc::format!("asymmetric edge {u}-{}", l.to)),
                }
            }
            let neg = links
                .iter()
                .filter(|l| l.sign == EdgeSign::Negative)
                .count();
            if neg != self.negative_links(u) {
                return Err(alloc::format!("negative count out of sync at {u}"));
            }
            edges += links.len();
        }
        if live != self.vertex_count || edges != 2 * self.edge_count {
            return Err("counters out of sync".into());
        }
        Ok(())
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tolerance) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(alloc::format!(
            "tolerance H must lie in [0, 1], got {tolerance}"
        )))
    }
}

/// Draws from an explicit distribution with one uniform variate.
pub fn sample_discrete<R: Rng + ?Sized>(dist: &[(VertexId, f64)], rng: &mut R) -> Option<VertexId> {
    let (last, _) = *dist.last()?;
    let mut u: f64 = rng.gen();
    for &(v, p) in dist {
        if u < p {
            return Some(v);
        }
        u -= p;
    }
    Some(last)
}

/// Picks one of `candidates` with probability proportional to its fitness,
/// uniformly when all fitness values are zero. One uniform variate.
pub fn pick_by_fitness<R: Rng + ?Sized>(
    net: &SignedNetwork,
    candidates: &[VertexId],
    rng: &mut R,
) -> Option<VertexId> {
    if candidates.is_empty() {
        return None;
    }
    let total: f64 = candidates.iter().map(|&v| net.fitness(v)).sum();
    let u: f64 = rng.gen();
    if total <= 0.0 {
        let idx = ((u * candidates.len() as f64) as usize).min(candidates.len() - 1);
        return Some(candidates[idx]);
    }
    let mut target = u * total;
    for &v in candidates {
        let f = net.fitness(v);
        if target < f {
            return Some(v);
        }
        target -= f;
    }
    candidates
        .iter()
        .rev()
        .copied()
        .find(|&v| net.fitness(v) > 0.0)
}
