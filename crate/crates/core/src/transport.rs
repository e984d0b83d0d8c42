//! Exact balanced transportation problem with integer masses.
//!
//! Successive shortest augmenting paths with Johnson potentials on the dense
//! bipartite residual graph `s -> sources -> sinks -> t`. Dijkstra runs in
//! `O(V^2 + E)` with an array scan, which suits the complete bipartite
//! graph. After the solve the potentials are checked as a dual certificate:
//! every residual arc must have non-negative reduced cost.

use crate::error::{Error, Result};

/// Absolute tolerance (scaled by the largest cost when it exceeds 1) for the optimality certificate.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

/// A solved transport plan.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    /// `(source, sink, mass)` for every arc carrying flow.
    pub flows: Vec<(usize, usize, u64)>,
    pub cost: f64,
}

/// Minimum-cost transport of `supply` onto `demand` with row-major `costs[i * sinks + j]`.
pub fn solve(supply: &[u64], demand: &[u64], costs: &[f64]) -> Result<TransportPlan> {
    let (ns, nt) = (supply.len(), demand.len());
    let total_supply: u64 = supply.iter().sum();
    let total_demand: u64 = demand.iter().sum();
    if total_supply != total_demand {
        return Err(Error::Unbalanced {
            supply: total_supply,
            demand: total_demand,
        });
    }
    if costs.len() != ns * nt {
        return Err(Error::DimensionMismatch {
            expected: ns * nt,
            found: costs.len(),
        });
    }
    if let Some(c) = costs.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(Error::Certificate(format!("invalid arc cost {c}")));
    }
    if total_supply == 0 {
        return Ok(TransportPlan {
            flows: Vec::new(),
            cost: 0.0,
        });
    }
    let mut solver = Solver::new(supply, demand, costs);
    solver.run();
    solver.certify()?;
    Ok(solver.plan())
}

// Node layout: 0 = s, 1..=ns sources, ns+1..=ns+nt sinks, ns+nt+1 = t.
struct Solver<'a> {
    ns: usize,
    nt: usize,
    costs: &'a [f64],
    supply: &'a [u64],
    demand: &'a [u64],
    supply_left: Vec<u64>,
    demand_left: Vec<u64>,
    flow: Vec<u64>,
    potential: Vec<f64>,
}

const UNSET: usize = usize::MAX;

impl<'a> Solver<'a> {
    fn new(supply: &'a [u64], demand: &'a [u64], costs: &'a [f64]) -> Self {
        let (ns, nt) = (supply.len(), demand.len());
        let mut potential = vec![0.0; ns + nt + 2];
        // Feasible start: sinks at the cheapest incoming arc.
        let mut floor = f64::INFINITY;
        for j in 0..nt {
            let p = (0..ns).map(|i| costs[i * nt + j]).fold(f64::INFINITY, f64::min);
            potential[1 + ns + j] = p;
            floor = floor.min(p);
        }
        potential[ns + nt + 1] = floor;
        Self {
            ns,
            nt,
            costs,
            supply,
            demand,
            supply_left: supply.to_vec(),
            demand_left: demand.to_vec(),
            flow: vec![0; ns * nt],
            potential,
        }
    }

    fn source(&self, i: usize) -> usize {
        1 + i
    }

    fn sink(&self, j: usize) -> usize {
        1 + self.ns + j
    }

    fn t(&self) -> usize {
        self.ns + self.nt + 1
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.nt + j]
    }

    fn run(&mut self) {
        let n = self.ns + self.nt + 2;
        let t = self.t();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![UNSET; n];
        let mut done = vec![false; n];

        while self.demand_left.iter().any(|&d| d > 0) {
            dist.fill(f64::INFINITY);
            parent.fill(UNSET);
            done.fill(false);
            dist[0] = 0.0;

            loop {
                let mut u = UNSET;
                let mut best = f64::INFINITY;
                for (v, &d) in dist.iter().enumerate() {
                    if !done[v] && d < best {
                        best = d;
                        u = v;
                    }
                }
                if u == UNSET {
                    break;
                }
                done[u] = true;
                let du = dist[u];
                let pu = self.potential[u];
                let relax = |v: usize, arc_cost: f64, dist: &mut [f64], parent: &mut [usize]| {
                    let reduced = (arc_cost + pu - self.potential[v]).max(0.0);
                    let cand = du + reduced;
                    if cand < dist[v] {
                        dist[v] = cand;
                        parent[v] = u;
                    }
                };
                if u == 0 {
                    for i in 0..self.ns {
                        if self.supply_left[i] > 0 {
                            relax(self.source(i), 0.0, &mut dist, &mut parent);
                        }
                    }
                } else if u <= self.ns {
                    let i = u - 1;
                    for j in 0..self.nt {
                        relax(self.sink(j), self.cost(i, j), &mut dist, &mut parent);
                    }
                    if self.supply_left[i] < self.supply[i] {
                        relax(0, 0.0, &mut dist, &mut parent);
                    }
                } else if u < t {
                    let j = u - 1 - self.ns;
                    for i in 0..self.ns {
                        if self.flow[i * self.nt + j] > 0 {
                            relax(self.source(i), -self.cost(i, j), &mut dist, &mut parent);
                        }
                    }
                    if self.demand_left[j] > 0 {
                        relax(t, 0.0, &mut dist, &mut parent);
                    }
                } else {
                    for j in 0..self.nt {
                        if self.demand_left[j] < self.demand[j] {
                            relax(self.sink(j), 0.0, &mut dist, &mut parent);
                        }
                    }
                }
            }

            debug_assert!(dist[t].is_finite(), "sink unreachable in a balanced instance");
            let cap = dist[t];
            for v in 0..n {
                self.potential[v] += dist[v].min(cap);
            }

            // Walk back from t: t <- sink_j <- source_i <- sink <- ... <- source_i0 <- s.
            let mut path = vec![t];
            let mut v = t;
            while v != 0 {
                v = parent[v];
                path.push(v);
            }
            path.reverse();
            let mut amount = u64::MAX;
            for w in path.windows(2) {
                let (a, b) = (w[0], w[1]);
                let residual = if a == 0 {
                    self.supply_left[b - 1]
                } else if b == t {
                    self.demand_left[a - 1 - self.ns]
                } else if a <= self.ns {
                    u64::MAX
                } else {
                    self.flow[(b - 1) * self.nt + (a - 1 - self.ns)]
                };
                amount = amount.min(residual);
            }
            for w in path.windows(2) {
                let (a, b) = (w[0], w[1]);
                if a == 0 {
                    self.supply_left[b - 1] -= amount;
                } else if b == t {
                    self.demand_left[a - 1 - self.ns] -= amount;
                } else if a <= self.ns {
                    self.flow[(a - 1) * self.nt + (b - 1 - self.ns)] += amount;
                } else {
                    self.flow[(b - 1) * self.nt + (a - 1 - self.ns)] -= amount;
                }
            }
        }
    }

    /// Reduced costs of all residual arcs between sources and sinks must be
    /// non-negative under the final potentials.
    fn certify(&self) -> Result<()> {
        let scale = self.costs.iter().copied().fold(1.0, f64::max);
        let tol = CERTIFICATE_TOLERANCE * scale;
        for i in 0..self.ns {
            let pi = self.potential[self.source(i)];
            for j in 0..self.nt {
                let pj = self.potential[self.sink(j)];
                let reduced = self.cost(i, j) + pi - pj;
                if reduced < -tol {
                    return Err(Error::Certificate(format!(
                        "arc ({i},{j}) has reduced cost {reduced:e}"
                    )));
                }
                if self.flow[i * self.nt + j] > 0 && reduced > tol {
                    return Err(Error::Certificate(format!(
                        "loaded arc ({i},{j}) has reduced cost {reduced:e}"
                    )));
                }
            }
        }
        if self.supply_left.iter().any(|&s| s > 0) {
            return Err(Error::Certificate("supply left unrouted".into()));
        }
        Ok(())
    }

    fn plan(&self) -> TransportPlan {
        let mut flows = Vec::new();
        let mut cost = 0.0;
        for i in 0..self.ns {
            for j in 0..self.nt {
                let f = self.flow[i * self.nt + j];
                if f > 0 {
                    flows.push((i, j, f));
                    cost += f as f64 * self.cost(i, j);
                }
            }
        }
        TransportPlan { flows, cost }
    }
}
