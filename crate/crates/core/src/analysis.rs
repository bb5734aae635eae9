//! Measurements on finished networks: degree distributions and power-law fits,
//! mean shortest-path distance, connected components and degree by ordinal.
//!
//! Everything here takes the network by shared reference.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{SignedNetwork, VertexId};

/// Largest component size for which all pairs are measured exactly.
pub const EXACT_DISTANCE_LIMIT: usize = 2000;
/// Pairs sampled when the component is too large and no count is given.
pub const DEFAULT_SAMPLE_PAIRS: usize = 2000;
/// Default lower edge of the fit window.
pub const DEFAULT_FIT_K_MIN: usize = 2;
/// A bin enters the default fit window when at least this many runs
/// contributed to it.
pub const DEFAULT_FIT_MIN_SUPPORT: usize = 5;
/// Largest probability mass a high-degree peak may carry: a star contributes
/// a single vertex per run, far below this.
pub const DEFAULT_PEAK_MAX_MASS: f64 = 0.05;

/// Normalized degree distribution, possibly averaged over several runs.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeHistogram {
    /// Degree to probability. Only non-empty bins are stored.
    pub probs: BTreeMap<usize, f64>,
    /// Vertex count of the network (mean over runs, rounded, when averaged).
    pub n_vertices: usize,
    /// Number of networks folded into this histogram.
    pub runs: usize,
    /// Degree to number of runs with a non-empty bin there.
    pub support: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(&k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.probs.keys().next_back().copied()
    }

    /// Default fit window: from degree two up to the largest degree that at
    /// least five runs (or every run, when fewer were folded in) contributed to.
    pub fn default_fit_window(&self) -> (usize, usize) {
        let need = DEFAULT_FIT_MIN_SUPPORT.min(self.runs.max(1));
        let k_max = self
            .support
            .iter()
            .rev()
            .find(|(_, &runs)| runs >= need)
            .map_or(DEFAULT_FIT_K_MIN, |(&k, _)| k);
        (DEFAULT_FIT_K_MIN, k_max)
    }
}

pub fn degree_distribution(net: &SignedNetwork) -> Result<DegreeHistogram> {
    if net.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in net.vertex_ids() {
        *counts.entry(net.degree(v)).or_default() += 1;
    }
    let n = net.vertex_count();
    Ok(DegreeHistogram {
        probs: counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / n as f64))
            .collect(),
        support: counts.keys().map(|&k| (k, 1)).collect(),
        n_vertices: n,
        runs: 1,
    })
}

/// Pointwise mean of several histograms; a bin missing from a run counts as
/// zero there. Each input weighs as many runs as it already folds in.
pub fn average_histograms(hists: &[DegreeHistogram]) -> Result<DegreeHistogram> {
    if hists.is_empty() {
        return Err(Error::InsufficientData {
            usable: 0,
            required: 1,
        });
    }
    let runs: usize = hists.iter().map(|h| h.runs.max(1)).sum();
    let mut probs: BTreeMap<usize, f64> = BTreeMap::new();
    let mut support: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices = 0.0;
    for h in hists {
        let w = h.runs.max(1) as f64;
        for (&k, &p) in &h.probs {
            *probs.entry(k).or_default() += p * w;
        }
        for (&k, &s) in &h.support {
            *support.entry(k).or_default() += s;
        }
        vertices += h.n_vertices as f64 * w;
    }
    for p in probs.values_mut() {
        *p /= runs as f64;
    }
    Ok(DegreeHistogram {
        probs,
        support,
        n_vertices: libm::round(vertices / runs as f64) as usize,
        runs,
    })
}

/// Least-squares line through `ln P(k)` against `ln k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    /// Negated slope.
    pub gamma: f64,
    /// Intercept of the line in natural-log units.
    pub intercept: f64,
    pub r_squared: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// Bins that entered the regression.
    pub bins: usize,
}

/// Fits over the non-empty bins with `k_min <= k <= k_max` (and `k >= 1`).
pub fn fit_power_law(hist: &DegreeHistogram, k_min: usize, k_max: usize) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = hist
        .probs
        .range(k_min.max(1)..=k_max.max(k_min.max(1)))
        .filter(|(_, &p)| p > 0.0)
        .map(|(&k, &p)| (libm::log(k as f64), libm::log(p)))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            usable: points.len(),
            required: 3,
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        gamma: -slope,
        intercept,
        r_squared,
        k_min,
        k_max,
        bins: points.len(),
    })
}

/// An isolated group of high-degree bins, as produced by a star-shaped network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreePeak {
    /// Largest degree of the bulk below the gap.
    pub bulk_max: usize,
    /// Smallest and largest degree of the peak.
    pub peak_min: usize,
    pub peak_max: usize,
    /// Probability mass above the gap.
    pub mass: f64,
    /// Width of the empty gap, `log10(peak_min / bulk_max)`.
    pub gap_decades: f64,
}

/// Splits the non-empty bins (degree >= 1) at their widest logarithmic gap
/// among the splits leaving at most `max_mass` above, and reports everything
/// above it as the peak.
pub fn separated_peak(hist: &DegreeHistogram, max_mass: f64) -> Option<DegreePeak> {
    let bins: Vec<(usize, f64)> = hist
        .probs
        .iter()
        .filter(|(&k, &p)| k >= 1 && p > 0.0)
        .map(|(&k, &p)| (k, p))
        .collect();
    let ks: Vec<usize> = bins.iter().map(|b| b.0).collect();
    let mut above = vec![0.0; bins.len() + 1];
    for i in (0..bins.len()).rev() {
        above[i] = above[i + 1] + bins[i].1;
    }
    let (split, gap) = ks
        .windows(2)
        .enumerate()
        .filter(|(i, _)| above[i + 1] <= max_mass)
        .map(|(i, w)| (i, libm::log10(w[1] as f64 / w[0] as f64)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let peak_min = ks[split + 1];
    Some(DegreePeak {
        bulk_max: ks[split],
        peak_min,
        peak_max: *ks.last()?,
        mass: hist.probs.range(peak_min..).map(|(_, p)| p).sum(),
        gap_decades: gap,
    })
}

/// Connected components, largest first (ties by smallest member id). Members
/// are listed in ascending id order.
pub fn connected_components(net: &SignedNetwork) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; net.id_bound()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in net.vertex_ids() {
        if seen[start.index()] {
            continue;
        }
        seen[start.index()] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v);
            for l in net.links(v) {
                if !seen[l.to.index()] {
                    seen[l.to.index()] = true;
                    queue.push_back(l.to);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    components
}

pub fn component_sizes(net: &SignedNetwork) -> Vec<usize> {
    connected_components(net).iter().map(Vec::len).collect()
}

/// Mean shortest-path distance inside the largest component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceSummary {
    pub mean: f64,
    /// Standard error of the mean; zero when exact.
    pub std_err: f64,
    pub exact: bool,
    /// Pairs measured.
    pub pairs: usize,
    pub component_size: usize,
    pub components: usize,
}

/// Adjacency of the largest component in compact form.
struct Compact {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    components: usize,
}

impl Compact {
    fn largest_component(net: &SignedNetwork) -> Self {
        let comps = connected_components(net);
        let members: &[VertexId] = comps.first().map_or(&[], Vec::as_slice);
        let mut local = vec![u32::MAX; net.id_bound()];
        for (i, v) in members.iter().enumerate() {
            local[v.index()] = i as u32;
        }
        let mut offsets = Vec::with_capacity(members.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in members {
            targets.extend(net.links(v).iter().map(|l| local[l.to.index()]));
            offsets.push(targets.len());
        }
        Compact {
            offsets,
            targets,
            components: comps.len(),
        }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Breadth-first distances from `source`; stops early once `stop` is
    /// reached.
    fn bfs(&self, source: usize, stop: Option<usize>, dist: &mut [u32], queue: &mut Vec<u32>) {
        dist.fill(u32::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push(source as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            if Some(v) == stop {
                return;
            }
            for &w in &self.targets[self.offsets[v]..self.offsets[v + 1]] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v] + 1;
                    queue.push(w);
                }
            }
        }
    }
}

/// Mean distance over all unordered pairs of the largest component.
pub fn mean_distance_exact(net: &SignedNetwork) -> Result<DistanceSummary> {
    let g = Compact::largest_component(net);
    let n = g.len();
    if n < 2 {
        return Err(Error::UndefinedDistance);
    }
    let mut dist = vec![0; n];
    let mut queue = Vec::with_capacity(n);
    let mut total: u64 = 0;
    for s in 0..n {
        g.bfs(s, None, &mut dist, &mut queue);
        total += dist[s + 1..].iter().map(|&d| d as u64).sum::<u64>();
    }
    let pairs = n * (n - 1) / 2;
    Ok(DistanceSummary {
        mean: total as f64 / pairs as f64,
        std_err: 0.0,
        exact: true,
        pairs,
        component_size: n,
        components: g.components,
    })
}

/// Monte Carlo mean distance over `pairs` uniformly drawn distinct pairs of
/// the largest component.
pub fn mean_distance_sampled<R: Rng + ?Sized>(
    net: &SignedNetwork,
    pairs: usize,
    rng: &mut R,
) -> Result<DistanceSummary> {
    let g = Compact::largest_component(net);
    let n = g.len();
    if n < 2 || pairs == 0 {
        return Err(Error::UndefinedDistance);
    }
    let mut dist = vec![0; n];
    let mut queue = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..pairs {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        g.bfs(u, Some(v), &mut dist, &mut queue);
        let d = dist[v] as f64;
        sum += d;
        sum_sq += d * d;
    }
    let m = pairs as f64;
    let mean = sum / m;
    let var = if pairs > 1 {
        ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DistanceSummary {
        mean,
        std_err: libm::sqrt(var / m),
        exact: false,
        pairs,
        component_size: n,
        components: g.components,
    })
}

/// Mean shortest-path distance ("diameter" in the small-world sense) of the
/// largest component: exact up to [`EXACT_DISTANCE_LIMIT`] vertices, sampled
/// over `sample_pairs` pairs (default [`DEFAULT_SAMPLE_PAIRS`]) beyond.
pub fn diameter<R: Rng + ?Sized>(
    net: &SignedNetwork,
    sample_pairs: Option<usize>,
    rng: &mut R,
) -> Result<DistanceSummary> {
    let largest = connected_components(net).first().map_or(0, Vec::len);
    if largest <= EXACT_DISTANCE_LIMIT {
        mean_distance_exact(net)
    } else {
        mean_distance_sampled(net, sample_pairs.unwrap_or(DEFAULT_SAMPLE_PAIRS), rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrdinalDegree {
    pub ordinal: u32,
    /// Mean final degree over the runs in which the vertex survived.
    pub mean_degree: Option<f64>,
    pub survivors: u32,
}

/// Accumulates final degrees per insertion ordinal across runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegreeByOrdinal {
    sums: Vec<u64>,
    counts: Vec<u32>,
}

impl DegreeByOrdinal {
    pub fn new(n_points: usize) -> Self {
        DegreeByOrdinal {
            sums: vec![0; n_points],
            counts: vec![0; n_points],
        }
    }

    pub fn add(&mut self, net: &SignedNetwork) {
        for (v, a) in net.vertices() {
            let o = a.ordinal as usize;
            if o >= self.sums.len() {
                self.sums.resize(o + 1, 0);
                self.counts.resize(o + 1, 0);
            }
            self.sums[o] += net.degree(v) as u64;
            self.counts[o] += 1;
        }
    }

    pub fn merge(&mut self, other: &DegreeByOrdinal) {
        let n = self.sums.len().max(other.sums.len());
        self.sums.resize(n, 0);
        self.counts.resize(n, 0);
        for (i, (&s, &c)) in other.sums.iter().zip(&other.counts).enumerate() {
            self.sums[i] += s;
            self.counts[i] += c;
        }
    }

    pub fn finish(&self) -> Vec<OrdinalDegree> {
        self.sums
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(o, (&s, &c))| OrdinalDegree {
                ordinal: o as u32,
                mean_degree: (c > 0).then(|| s as f64 / c as f64),
                survivors: c,
            })
            .collect()
    }
}

/// Mean final degree per ordinal over a set of runs of equal length.
pub fn degree_by_ordinal<'a>(
    runs: impl IntoIterator<Item = &'a SignedNetwork>,
    n_points: usize,
) -> Vec<OrdinalDegree> {
    let mut acc = DegreeByOrdinal::new(n_points);
    for net in runs {
        acc.add(net);
    }
    acc.finish()
}

/// Average of the per-ordinal means inside each of `parts` equal ordinal
/// ranges; ordinals nobody survived at are skipped.
pub fn ordinal_group_means(curve: &[OrdinalDegree], parts: usize) -> Vec<Option<f64>> {
    let n = curve.len();
    (0..parts)
        .map(|p| {
            let lo = p * n / parts;
            let hi = (p + 1) * n / parts;
            let values: Vec<f64> = curve[lo..hi].iter().filter_map(|o| o.mean_degree).collect();
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        })
        .collect()
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}
