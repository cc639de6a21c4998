use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::RingElem;
use crate::kernel::CellParams;

/// One level of the dynamic program: partitioning vectors of weight `level`
/// mapped to their accumulated exact weights.
#[derive(Debug, Clone)]
pub struct CellTable {
    pub level: usize,
    pub entries: BTreeMap<Vec<u16>, RingElem>,
}

#[derive(Debug, Clone, Default)]
pub struct TableStats {
    pub peak_entries: usize,
    pub per_level: Vec<usize>,
}

/// Reachability pruning for equality/lower-bound cardinality constraints:
/// a monomial whose degree cannot reach the required bound with the atoms
/// the remaining elements can still add contributes nothing.
#[derive(Debug, Clone)]
pub struct PruneInfo {
    pub min_required: Vec<usize>,
    pub arity: Vec<u8>,
    pub n: usize,
}

impl PruneInfo {
    fn enabled(&self) -> bool {
        self.min_required.iter().any(|m| *m > 0)
    }

    /// Max degree the variable can still gain after `level` elements.
    fn future_cap(&self, var: usize, level: usize) -> usize {
        let n = self.n;
        match self.arity[var] {
            1 => n - level,
            _ => n * n - level * level,
        }
    }

    fn keep(&self, value: &mut RingElem, level: usize) -> bool {
        if !self.enabled() {
            return !value.is_zero();
        }
        let caps: Vec<usize> = (0..self.min_required.len())
            .map(|v| self.future_cap(v, level))
            .collect();
        match value {
            RingElem::Rat(_) => self
                .min_required
                .iter()
                .enumerate()
                .all(|(v, m)| *m <= caps[v]),
            RingElem::Poly(p) => {
                let mins = &self.min_required;
                p.retain(|mono| {
                    mins.iter()
                        .enumerate()
                        .all(|(v, m)| mono[v] as usize + caps[v] >= *m)
                });
                !p.is_zero()
            }
        }
    }
}

fn delta(k: &[u16], j: usize) -> Vec<u16> {
    let mut out = k.to_vec();
    out[j] += 1;
    out
}

struct PowerTables {
    // pow[new][old][d] = r[new][old]^d
    pow: Vec<Vec<Vec<RingElem>>>,
}

impl PowerTables {
    fn build(params: &CellParams, n: usize) -> Self {
        let p = params.num_cells();
        let pow = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        let mut v = Vec::with_capacity(n);
                        v.push(RingElem::one());
                        for d in 1..n {
                            let prev = &v[d - 1];
                            v.push(prev * &params.r[i][j]);
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        PowerTables { pow }
    }

    /// prod_l r[j][l]^(k_l), or None when some factor is zero.
    fn factor(&self, j: usize, k: &[u16]) -> Option<RingElem> {
        let mut acc = RingElem::one();
        for (l, &kl) in k.iter().enumerate() {
            if kl == 0 {
                continue;
            }
            let f = &self.pow[j][l][kl as usize];
            if f.is_zero() {
                return None;
            }
            acc = &acc * f;
            if acc.is_zero() {
                return None;
            }
        }
        Some(acc)
    }
}

const PARALLEL_THRESHOLD: usize = 512;

fn step(
    table: &BTreeMap<Vec<u16>, RingElem>,
    params: &CellParams,
    pows: &PowerTables,
) -> BTreeMap<Vec<u16>, RingElem> {
    let p = params.num_cells();
    let process = |chunk: &[(&Vec<u16>, &RingElem)]| {
        let mut local: BTreeMap<Vec<u16>, RingElem> = BTreeMap::new();
        for (k, w_old) in chunk {
            for j in 0..p {
                if params.w[j].is_zero() {
                    continue;
                }
                let Some(factor) = pows.factor(j, k) else {
                    continue;
                };
                let w_new = &(&**w_old * &params.w[j]) * &factor;
                if w_new.is_zero() {
                    continue;
                }
                match local.entry(delta(k, j)) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(w_new);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += &w_new;
                    }
                }
            }
        }
        local
    };

    let entries: Vec<(&Vec<u16>, &RingElem)> = table.iter().collect();
    if entries.len() < PARALLEL_THRESHOLD {
        process(&entries)
    } else {
        // map over chunks, then a keyed reduction; addition is exact and
        // commutative so the result is identical for any thread count
        let chunk_size = entries.len().div_ceil(rayon::current_num_threads() * 4);
        let locals: Vec<BTreeMap<Vec<u16>, RingElem>> = entries
            .par_chunks(chunk_size.max(1))
            .map(process)
            .collect();
        let mut merged = BTreeMap::new();
        for local in locals {
            for (k, v) in local {
                match merged.entry(k) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(v);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += &v;
                    }
                }
            }
        }
        merged
    }
}

fn initial_table(params: &CellParams) -> BTreeMap<Vec<u16>, RingElem> {
    let p = params.num_cells();
    let mut table = BTreeMap::new();
    for j in 0..p {
        if !params.w[j].is_zero() {
            let mut k = vec![0u16; p];
            k[j] = 1;
            table.insert(k, params.w[j].clone());
        }
    }
    table
}

/// The incremental dynamic program. Returns the sum over the level-n table:
/// the weighted count (for one fixed domain ordering when the parameters are
/// ordered). Entries whose constraint degrees can no longer reach their
/// bounds are pruned level by level.
pub fn incremental_wfomc(
    params: &CellParams,
    n: usize,
    prune: Option<&PruneInfo>,
) -> (RingElem, TableStats) {
    let mut stats = TableStats::default();
    if n == 0 {
        return (RingElem::one(), stats);
    }
    if params.num_cells() == 0 {
        return (RingElem::zero(), stats);
    }
    let pows = PowerTables::build(params, n);
    let mut table = initial_table(params);
    apply_prune(&mut table, prune, 1);
    stats.record(table.len());
    for _level in 2..=n {
        table = step(&table, params, &pows);
        apply_prune(&mut table, prune, _level);
        stats.record(table.len());
    }
    let mut sum = RingElem::zero();
    for v in table.values() {
        sum += v;
    }
    (sum.normalized(), stats)
}

fn apply_prune(
    table: &mut BTreeMap<Vec<u16>, RingElem>,
    prune: Option<&PruneInfo>,
    level: usize,
) {
    if let Some(info) = prune {
        let mut dead = Vec::new();
        for (k, v) in table.iter_mut() {
            if !info.keep(v, level) {
                dead.push(k.clone());
            }
        }
        for k in dead {
            table.remove(&k);
        }
    }
}

impl TableStats {
    fn record(&mut self, len: usize) {
        self.per_level.push(len);
        self.peak_entries = self.peak_entries.max(len);
    }
}

/// All intermediate tables, for inspection and golden tests. No pruning.
pub fn incremental_tables(params: &CellParams, n: usize) -> Vec<CellTable> {
    let mut out = Vec::new();
    if n == 0 || params.num_cells() == 0 {
        return out;
    }
    let pows = PowerTables::build(params, n);
    let mut table = initial_table(params);
    out.push(CellTable {
        level: 1,
        entries: table.clone(),
    });
    for level in 2..=n {
        table = step(&table, params, &pows);
        out.push(CellTable {
            level,
            entries: table.clone(),
        });
    }
    out
}
