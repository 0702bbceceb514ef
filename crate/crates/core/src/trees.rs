//! Geometric trees, essential stars and the tree recursion for double
//! Hurwitz numbers.
//!
//! A geometric tree joins blocks of `mu`-indices to blocks of `nu`-indices;
//! edge weights are forced by requiring the weights at each vertex to add up
//! to the block's part sum. The recursion sums over stars centred at the
//! `nu`-block `J_1` adjacent to the anchor `{1}`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{biguint_to_rational, factorial, rat, rat_pow, set_partitions, HurwitzPair, IndexSet, Rational};

/// Default bound on `m + n` for [`enumerate_geometric`].
pub const DEFAULT_TREE_BOUND: usize = 12;

/// Edges are `(mu block, nu block, weight)` with block positions into
/// `mu_blocks` and `nu_blocks`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeometricTree {
    pub mu_blocks: Vec<IndexSet>,
    pub nu_blocks: Vec<IndexSet>,
    pub edges: Vec<(usize, usize, i64)>,
}

/// Blocks and edges without weights, for comparing trees across points.
pub type TreeShape = (Vec<IndexSet>, Vec<IndexSet>, Vec<(usize, usize)>);

impl GeometricTree {
    pub fn shape(&self) -> TreeShape {
        (
            self.mu_blocks.clone(),
            self.nu_blocks.clone(),
            self.edges.iter().map(|&(a, b, _)| (a, b)).collect(),
        )
    }

    pub fn degree_of_mu_block(&self, block: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == block).count()
    }
}

impl Serialize for GeometricTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            mu_blocks: Vec<IndexSet>,
            nu_blocks: Vec<IndexSet>,
            edges: Vec<(usize, usize, String)>,
        }
        Raw {
            mu_blocks: self.mu_blocks.clone(),
            nu_blocks: self.nu_blocks.clone(),
            edges: self.edges.iter().map(|&(a, b, w)| (a, b, w.to_string())).collect(),
        }
        .serialize(s)
    }
}

fn block_sum(values: &[i64], block: IndexSet) -> i64 {
    block.iter().map(|i| values[i]).sum()
}

type EdgeList = Vec<(usize, usize)>;

/// Spanning trees of the complete bipartite graph `K_{k,l}`, as edge lists.
fn bipartite_spanning_trees(k: usize, l: usize) -> Vec<EdgeList> {
    let all: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..l).map(move |b| (a, b))).collect();
    let need = k + l - 1;
    let mut out = Vec::new();
    let mut parent: Vec<usize> = (0..k + l).collect();

    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }

    fn rec(
        all: &[(usize, usize)],
        pos: usize,
        k: usize,
        need: usize,
        chosen: &mut Vec<(usize, usize)>,
        parent: &mut Vec<usize>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if chosen.len() == need {
            out.push(chosen.clone());
            return;
        }
        if all.len() - pos < need - chosen.len() {
            return;
        }
        let (a, b) = all[pos];
        let (ra, rb) = (find(parent, a), find(parent, k + b));
        if ra != rb {
            // union without path compression so it can be undone
            parent[ra] = rb;
            chosen.push((a, b));
            rec(all, pos + 1, k, need, chosen, parent, out);
            chosen.pop();
            parent[ra] = ra;
        }
        rec(all, pos + 1, k, need, chosen, parent, out);
    }

    rec(&all, 0, k, need, &mut Vec::new(), &mut parent, &mut out);
    out
}

/// Edge weights forced by the vertex sums, by repeatedly stripping leaves.
fn forced_weights(k: usize, l: usize, edges: &[(usize, usize)], mu_sums: &[i64], nu_sums: &[i64]) -> Vec<i64> {
    let mut demand: Vec<i64> = mu_sums.iter().chain(nu_sums).copied().collect();
    let mut degree = vec![0usize; k + l];
    for &(a, b) in edges {
        degree[a] += 1;
        degree[k + b] += 1;
    }
    let mut weights = vec![0i64; edges.len()];
    let mut alive = vec![true; edges.len()];
    for _ in 0..edges.len() {
        let (e, leaf) = edges
            .iter()
            .enumerate()
            .filter(|(e, _)| alive[*e])
            .find_map(|(e, &(a, b))| {
                if degree[a] == 1 {
                    Some((e, a))
                } else if degree[k + b] == 1 {
                    Some((e, k + b))
                } else {
                    None
                }
            })
            .expect("a forest with edges has a leaf");
        let (a, b) = edges[e];
        let other = if leaf == a { k + b } else { a };
        weights[e] = demand[leaf];
        demand[other] -= demand[leaf];
        demand[leaf] = 0;
        degree[a] -= 1;
        degree[k + b] -= 1;
        alive[e] = false;
    }
    weights
}

/// All geometric trees for a pair.
pub fn enumerate_geometric(pair: &HurwitzPair) -> Result<Vec<GeometricTree>> {
    enumerate_geometric_bounded(pair, DEFAULT_TREE_BOUND)
}

pub fn enumerate_geometric_bounded(pair: &HurwitzPair, bound: usize) -> Result<Vec<GeometricTree>> {
    let (m, n) = (pair.m(), pair.n());
    if m + n > bound {
        return Err(Error::BudgetExceeded {
            what: "m + n for tree enumeration",
            needed: (m + n) as u128,
            budget: bound as u128,
        });
    }
    let mu: Vec<i64> = pair.mu.parts().iter().map(|&p| p as i64).collect();
    let nu: Vec<i64> = pair.nu.parts().iter().map(|&p| p as i64).collect();
    Ok(geometric_trees_at(&mu, &nu))
}

/// Geometric trees for arbitrary positive integer weights (not necessarily
/// sorted), with index 0 of `mu` as the anchor.
pub fn geometric_trees_at(mu: &[i64], nu: &[i64]) -> Vec<GeometricTree> {
    let (m, n) = (mu.len(), nu.len());
    let mut out = Vec::new();
    let mu_indices: Vec<usize> = (0..m).collect();
    let nu_indices: Vec<usize> = (0..n).collect();
    let nu_partitions: Vec<Vec<IndexSet>> = set_partitions(&nu_indices, false)
        .map(|p| p.into_iter().map(IndexSet::from_indices).collect())
        .collect();
    let mut tree_cache: HashMap<(usize, usize), Vec<EdgeList>> = HashMap::new();
    for mu_part in set_partitions(&mu_indices, true) {
        let mu_blocks: Vec<IndexSet> = mu_part.into_iter().map(IndexSet::from_indices).collect();
        let mu_sums: Vec<i64> = mu_blocks.iter().map(|&b| block_sum(mu, b)).collect();
        for nu_blocks in &nu_partitions {
            let nu_sums: Vec<i64> = nu_blocks.iter().map(|&b| block_sum(nu, b)).collect();
            let (k, l) = (mu_blocks.len(), nu_blocks.len());
            let trees = tree_cache
                .entry((k, l))
                .or_insert_with(|| bipartite_spanning_trees(k, l));
            for edges in trees.iter() {
                // (iii): the anchor block is a leaf
                if edges.iter().filter(|e| e.0 == 0).count() != 1 {
                    continue;
                }
                let weights = forced_weights(k, l, edges, &mu_sums, &nu_sums);
                // (ii): positive weights
                if weights.iter().any(|&w| w <= 0) {
                    continue;
                }
                // (i): the x side of the target carries a branch point, i.e.
                // sum over mu blocks of |I| + deg(I) - 2 is positive
                let excess: usize = mu_blocks.iter().map(|b| b.len()).sum::<usize>() + edges.len();
                if excess <= 2 * k {
                    continue;
                }
                out.push(GeometricTree {
                    mu_blocks: mu_blocks.clone(),
                    nu_blocks: nu_blocks.clone(),
                    edges: edges.iter().zip(&weights).map(|(&(a, b), &w)| (a, b, w)).collect(),
                });
            }
        }
    }
    out
}

/// `delta_T = prod(gamma_e) / mu_1`.
pub fn multiplicity_delta(tree: &GeometricTree, mu1: u32) -> Rational {
    let prod = tree.edges.iter().fold(Rational::one(), |acc, e| acc * rat(e.2));
    prod / rat(mu1 as i64)
}

/// A star in the extended set of essential trees: white `mu`-indices and
/// black blocks `(I, J)` hang off the centre `J_1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EssentialStar {
    pub white: IndexSet,
    pub black: Vec<(IndexSet, IndexSet)>,
    pub j1: IndexSet,
}

impl EssentialStar {
    /// `|J_1| + deg J_1 - 3`, with `deg J_1 = 1 + |W| + #black`.
    pub fn u(&self) -> i64 {
        self.j1.len() as i64 + 1 + self.white.len() as i64 + self.black.len() as i64 - 3
    }

    /// The formal term with every `mu`-index white.
    pub fn is_added_tree(&self) -> bool {
        self.black.is_empty()
    }

    /// The star as a tree: `{1}`, the white singletons and black blocks on
    /// the `mu` side; `J_1` and singletons of each `J` on the `nu` side.
    pub fn expand(&self, mu: &[i64], nu: &[i64]) -> GeometricTree {
        let mut mu_blocks = vec![IndexSet::singleton(0)];
        mu_blocks.extend(self.white.iter().map(IndexSet::singleton));
        let first_black = mu_blocks.len();
        mu_blocks.extend(self.black.iter().map(|b| b.0));
        let mut nu_blocks = vec![self.j1];
        let mut edges: Vec<(usize, usize, i64)> = Vec::new();
        for (a, &blk) in mu_blocks.iter().enumerate() {
            let w = if a < first_black {
                block_sum(mu, blk)
            } else {
                let (bi, bj) = self.black[a - first_black];
                block_sum(mu, bi) - block_sum(nu, bj)
            };
            edges.push((a, 0, w));
        }
        for (k, &(_, bj)) in self.black.iter().enumerate() {
            for j in bj.iter() {
                nu_blocks.push(IndexSet::singleton(j));
                edges.push((first_black + k, nu_blocks.len() - 1, nu[j]));
            }
        }
        canonical_tree(mu_blocks, nu_blocks, edges)
    }
}

/// Reorders blocks the way [`geometric_trees_at`] lists them (by smallest
/// element, anchor first) so trees compare structurally.
fn canonical_tree(
    mu_blocks: Vec<IndexSet>,
    nu_blocks: Vec<IndexSet>,
    edges: Vec<(usize, usize, i64)>,
) -> GeometricTree {
    let order = |blocks: &[IndexSet]| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..blocks.len()).collect();
        idx.sort_by_key(|&i| blocks[i].0.trailing_zeros());
        idx
    };
    let mo = order(&mu_blocks);
    let no = order(&nu_blocks);
    let mut m_rank = vec![0; mo.len()];
    for (r, &i) in mo.iter().enumerate() {
        m_rank[i] = r;
    }
    let mut n_rank = vec![0; no.len()];
    for (r, &i) in no.iter().enumerate() {
        n_rank[i] = r;
    }
    let mut edges: Vec<(usize, usize, i64)> = edges.into_iter().map(|(a, b, w)| (m_rank[a], n_rank[b], w)).collect();
    edges.sort_unstable();
    GeometricTree {
        mu_blocks: mo.iter().map(|&i| mu_blocks[i]).collect(),
        nu_blocks: no.iter().map(|&i| nu_blocks[i]).collect(),
        edges,
    }
}

impl Serialize for EssentialStar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Block {
            #[serde(rename = "I")]
            i: IndexSet,
            #[serde(rename = "J")]
            j: IndexSet,
        }
        #[derive(Serialize)]
        struct Raw {
            white: IndexSet,
            black: Vec<Block>,
            j1: IndexSet,
            u: i64,
        }
        Raw {
            white: self.white,
            black: self.black.iter().map(|&(i, j)| Block { i, j }).collect(),
            j1: self.j1,
            u: self.u(),
        }
        .serialize(s)
    }
}

/// The extended essential set for a pair, anchored at the first part.
pub fn enumerate_essential_star(pair: &HurwitzPair) -> Vec<EssentialStar> {
    let mu: Vec<i64> = pair.mu.parts().iter().map(|&p| p as i64).collect();
    let nu: Vec<i64> = pair.nu.parts().iter().map(|&p| p as i64).collect();
    essential_stars_at(&mu, &nu)
}

/// Essential stars for arbitrary weights, with index 0 of `mu` as anchor.
///
/// Black blocks are any `(I, J)` with `I` nonempty, `(|I|, |J|) != (1, 0)`
/// and `mu_I - nu_J > 0`; singleton `I` with nonempty `J` is allowed.
pub fn essential_stars_at(mu: &[i64], nu: &[i64]) -> Vec<EssentialStar> {
    let (m, n) = (mu.len(), nu.len());
    let rest: Vec<usize> = (1..m).collect();
    let mut out = Vec::new();
    let partitions: Vec<Vec<Vec<usize>>> = if rest.is_empty() {
        vec![Vec::new()]
    } else {
        set_partitions(&rest, false).collect()
    };
    for partition in partitions {
        let blocks: Vec<IndexSet> = partition.into_iter().map(IndexSet::from_indices).collect();
        let singles: Vec<usize> = (0..blocks.len()).filter(|&b| blocks[b].len() == 1).collect();
        // choose which singleton blocks are white
        for white_mask in 0u32..(1 << singles.len()) {
            let white = IndexSet::from_indices(
                singles
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| white_mask & (1 << s) != 0)
                    .flat_map(|(_, &b)| blocks[b].iter()),
            );
            let black: Vec<IndexSet> = blocks.iter().copied().filter(|b| !b.is_subset_of(white)).collect();
            assign_nu(mu, nu, n, white, &black, &mut out);
        }
    }
    out
}

/// Distributes the `nu`-indices between the centre and the black blocks.
fn assign_nu(mu: &[i64], nu: &[i64], n: usize, white: IndexSet, black: &[IndexSet], out: &mut Vec<EssentialStar>) {
    let b = black.len();
    let mut choice = vec![0usize; n]; // 0 = centre, t = black block t-1
    loop {
        let mut js = vec![IndexSet::EMPTY; b + 1];
        for (j, &c) in choice.iter().enumerate() {
            js[c] = js[c].union(IndexSet::singleton(j));
        }
        let ok = !js[0].is_empty()
            && black
                .iter()
                .zip(&js[1..])
                .all(|(&bi, &bj)| !(bi.len() == 1 && bj.is_empty()) && block_sum(mu, bi) - block_sum(nu, bj) > 0);
        if ok {
            out.push(EssentialStar {
                white,
                black: black.iter().copied().zip(js[1..].iter().copied()).collect(),
                j1: js[0],
            });
        }
        // next assignment in base b + 1
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            choice[pos] += 1;
            if choice[pos] <= b {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Memo for the tree recursion keyed by `(anchor, other mu parts sorted, nu
/// sorted)`.
type RecursionKey = (u32, Vec<u32>, Vec<u32>);

#[derive(Default)]
pub struct TreeRecursion {
    memo: Mutex<HashMap<RecursionKey, Rational>>,
}

impl TreeRecursion {
    pub fn new() -> Self {
        TreeRecursion::default()
    }

    /// Labelled genus-0 double Hurwitz number from the star recursion.
    pub fn value(&self, pair: &HurwitzPair) -> Rational {
        self.value_anchored(pair.mu.parts(), pair.nu.parts())
    }

    /// Same recursion with `mu[0]` as the anchor; `mu` need not be sorted.
    pub fn value_anchored(&self, mu: &[u32], nu: &[u32]) -> Rational {
        let mut rest = mu[1..].to_vec();
        rest.sort_unstable_by(|a, b| b.cmp(a));
        let mut nu_sorted = nu.to_vec();
        nu_sorted.sort_unstable_by(|a, b| b.cmp(a));
        let key = (mu[0], rest, nu_sorted);
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let mut mu_canon = vec![key.0];
        mu_canon.extend_from_slice(&key.1);
        let value = self.compute(&mu_canon, &key.2);
        self.memo.lock().unwrap().insert(key, value.clone());
        value
    }

    fn compute(&self, mu: &[u32], nu: &[u32]) -> Rational {
        let (m, n) = (mu.len(), nu.len());
        let mu_i: Vec<i64> = mu.iter().map(|&p| p as i64).collect();
        let nu_i: Vec<i64> = nu.iter().map(|&p| p as i64).collect();
        let mu1 = rat(mu[0] as i64);
        let mut total = Rational::zero();
        for star in essential_stars_at(&mu_i, &nu_i) {
            let mut term = rat_pow(&mu1, star.u()).expect("anchor part is positive");
            for &(bi, bj) in &star.black {
                let weight = block_sum(&mu_i, bi) - block_sum(&nu_i, bj);
                let sub_mu: Vec<u32> = bi.iter().map(|i| mu[i]).collect();
                let mut sub_nu: Vec<u32> = bj.iter().map(|j| nu[j]).collect();
                sub_nu.push(weight as u32);
                let h = self.value_anchored(&sorted_desc(sub_mu), &sub_nu);
                let denom = biguint_to_rational(&factorial((bi.len() + bj.len() - 1) as u64));
                term *= rat(weight) * h / denom;
            }
            total += term;
        }
        total * biguint_to_rational(&factorial((m + n - 2) as u64))
    }
}

fn sorted_desc(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn shared() -> &'static TreeRecursion {
    static MEMO: OnceLock<TreeRecursion> = OnceLock::new();
    MEMO.get_or_init(TreeRecursion::new)
}

/// [`TreeRecursion::value`] on a process-wide memo.
pub fn tree_recursion_value(pair: &HurwitzPair) -> Rational {
    shared().value(pair)
}
