//! Per-slot user-UAV assignment: the capacity-constrained greedy with
//! sacrifice values plus the two benchmark schemes (best-metric with
//! truncation, and balanced minimum-cost matching).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::clustering::AssignmentMatrix;
use crate::environment::{BuildingGrid, Point3, Region};
use rand::Rng;
use crate::error::Result;
use crate::matching::dense_min_cost;
use crate::mobility::{expected_data_matrix, LinkParams, UavState, UserState};

/// Throughput a spilled user gives up by taking a non-preferred UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SacrificeEntry {
    pub user: usize,
    pub uav: usize,
    /// Bits of expected data lost versus the user's best UAV.
    pub sacrifice: f64,
}

impl Eq for SacrificeEntry {}

impl Ord for SacrificeEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap order through Reverse: smallest sacrifice first, ties by
        // user id then UAV id for reproducibility.
        self.sacrifice
            .total_cmp(&other.sacrifice)
            .then(self.user.cmp(&other.user))
            .then(self.uav.cmp(&other.uav))
    }
}

impl PartialOrd for SacrificeEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Assignment knobs shared by the per-slot schemes.
#[derive(Debug, Clone, Copy)]
pub struct AssignParams {
    pub link: LinkParams,
    /// Whether serving a user resets its priority wait.
    pub reset_wait_on_service: bool,
}

/// Greedy capacity-constrained assignment for one slot, on a precomputed
/// expected-data matrix indexed `[user][uav]`:
///
/// 1. every user with a positive best rate joins its best UAV's pool;
/// 2. over-capacity UAVs keep their top-priority users, the rest spill;
/// 3. spilled users are re-placed in ascending order of sacrifice (expected
///    data lost versus their best UAV) onto UAVs with free capacity;
/// 4. a spilled user whose cheapest remaining option carries zero expected
///    data stays unserved;
/// 5. unserved users accrue wait and priority.
pub fn greedy_assign_with_data(
    users: &mut [UserState],
    capacities: &[usize],
    data: &[Vec<f64>],
    slot: f64,
    reset_wait_on_service: bool,
) -> AssignmentMatrix {
    let num_users = users.len();
    let num_uavs = capacities.len();
    let mut matrix = AssignmentMatrix::new(num_users, capacities.to_vec());

    // Step 1: everyone to their best UAV (ties to the lowest id); users whose
    // best expected data is zero can gain nothing anywhere and stay unserved.
    let mut best_uav = vec![0usize; num_users];
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); num_uavs];
    for k in 0..num_users {
        let mut best = 0usize;
        for m in 1..num_uavs {
            if data[k][m] > data[k][best] {
                best = m;
            }
        }
        best_uav[k] = best;
        if data[k][best] > 0.0 {
            pools[best].push(k);
        }
    }

    // Step 2: split into full and free; full UAVs keep their top-capacity
    // users by priority (ties by user id), the remainder spills.
    let mut free: Vec<bool> = vec![false; num_uavs];
    let mut spilled: Vec<usize> = Vec::new();
    for m in 0..num_uavs {
        if pools[m].len() < capacities[m] {
            free[m] = true;
            for &k in &pools[m] {
                matrix.assign(k, m);
            }
        } else {
            // Retention order: priority first; among equal priorities keep
            // the users this UAV can serve best, then id. The data tie-break
            // is what guarantees the greedy never delivers less in total
            // than best-metric truncation when priorities tie (the spilled
            // users are re-placed at non-negative rates instead of dropped).
            pools[m].sort_by(|&a, &b| {
                users[b]
                    .priority()
                    .partial_cmp(&users[a].priority())
                    .unwrap()
                    .then(data[b][m].partial_cmp(&data[a][m]).unwrap())
                    .then(users[a].id.cmp(&users[b].id))
            });
            for (rank, &k) in pools[m].iter().enumerate() {
                if rank < capacities[m] {
                    matrix.assign(k, m);
                } else {
                    spilled.push(k);
                }
            }
        }
    }

    // Step 3: sacrifice values against the initial free set, consumed in
    // ascending order; entries for UAVs that fill up meanwhile are skipped.
    let mut heap: BinaryHeap<std::cmp::Reverse<SacrificeEntry>> = BinaryHeap::new();
    for &k in &spilled {
        for m in 0..num_uavs {
            if free[m] {
                heap.push(std::cmp::Reverse(SacrificeEntry {
                    user: k,
                    uav: m,
                    sacrifice: data[k][best_uav[k]] - data[k][m],
                }));
            }
        }
    }
    let mut pending = spilled.len();
    let mut done = vec![false; num_users];
    while pending > 0 {
        let Some(std::cmp::Reverse(entry)) = heap.pop() else {
            break; // free capacity exhausted; the rest stay unserved
        };
        if done[entry.user] || !free[entry.uav] {
            continue;
        }
        done[entry.user] = true;
        pending -= 1;
        if data[entry.user][entry.uav] > 0.0 {
            matrix.assign(entry.user, entry.uav);
            if matrix.is_full(entry.uav) {
                free[entry.uav] = false;
            }
        }
        // Zero expected data on the least-sacrifice option means zero on
        // every remaining free UAV: the user stays unserved.
    }

    // Step 5: wait/priority accounting for this slot.
    crate::clustering::bump_priorities(users, &matrix, slot, reset_wait_on_service);
    matrix
}

/// Greedy assignment for one slot; computes the expected-data matrix from
/// the current user and UAV states.
pub fn greedy_assign(
    users: &mut [UserState],
    uavs: &[UavState],
    grid: &BuildingGrid,
    cfg: &AssignParams,
) -> Result<AssignmentMatrix> {
    let data = expected_data_matrix(users, uavs, grid, &cfg.link)?;
    let capacities: Vec<usize> = uavs.iter().map(|u| u.capacity).collect();
    Ok(greedy_assign_with_data(
        users,
        &capacities,
        &data,
        cfg.link.slot,
        cfg.reset_wait_on_service,
    ))
}

/// Metric the best-metric baseline ranks UAVs by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMetric {
    /// Lowest path loss, i.e. nearest UAV, LoS-blind.
    PathLoss,
    /// Highest expected transferred data.
    Throughput,
}

/// How the best-metric baseline resolves over-capacity UAVs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// Keep the best `capacity` users by the metric, drop the rest.
    Truncate,
    /// Ignore capacity limits entirely (the classical unconstrained scheme).
    Unlimited,
}

/// Benchmark scheme: every user goes to its best UAV by the metric, with no
/// redistribution. Over-capacity UAVs keep their best-metric users and drop
/// the rest. Pairings that carry zero expected data are dropped too: a link
/// that can deliver nothing serves nobody.
pub fn baseline_best_metric(
    users: &[UserState],
    uavs: &[UavState],
    grid: &BuildingGrid,
    metric: BaselineMetric,
    capacity_mode: CapacityMode,
    cfg: &AssignParams,
) -> Result<AssignmentMatrix> {
    let data = expected_data_matrix(users, uavs, grid, &cfg.link)?;
    let capacities: Vec<usize> = match capacity_mode {
        CapacityMode::Truncate => uavs.iter().map(|u| u.capacity).collect(),
        CapacityMode::Unlimited => vec![usize::MAX; uavs.len()],
    };
    let mut matrix = AssignmentMatrix::new(users.len(), capacities.clone());

    // Score per user: larger is better.
    let score = |k: usize, m: usize| -> f64 {
        match metric {
            BaselineMetric::Throughput => data[k][m],
            BaselineMetric::PathLoss => -users[k].position.distance(&uavs[m].position),
        }
    };

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); uavs.len()];
    for k in 0..users.len() {
        let mut best = 0usize;
        for m in 1..uavs.len() {
            if score(k, m) > score(k, best) {
                best = m;
            }
        }
        match metric {
            // The throughput metric shares the greedy's first step: a user
            // whose best expected data is zero is unserved outright.
            BaselineMetric::Throughput if data[k][best] <= 0.0 => {}
            _ => pools[best].push(k),
        }
    }
    for m in 0..uavs.len() {
        let pool = &mut pools[m];
        pool.sort_by(|&a, &b| {
            score(b, m)
                .partial_cmp(&score(a, m))
                .unwrap()
                .then(a.cmp(&b))
        });
        for (rank, &k) in pool.iter().enumerate() {
            if rank >= capacities[m] {
                break; // truncated: the remaining users stay unserved
            }
            if data[k][m] > 0.0 {
                matrix.assign(k, m);
            }
        }
    }
    Ok(matrix)
}

/// Balanced assignment at fixed UAV positions: users matched to UAV slots
/// (each UAV replicated to its capacity) by minimum-cost matching on squared
/// ground distance. LoS plays no role. When users outnumber slots the
/// cheapest-to-place users win and the rest go unserved.
pub fn balanced_assignment(
    users: &[UserState],
    positions: &[Point3],
    capacities: &[usize],
) -> AssignmentMatrix {
    let num_users = users.len();
    let mut slot_uav: Vec<usize> = Vec::new();
    for (m, &cap) in capacities.iter().enumerate() {
        // A replica per capacity unit, capped: replicas beyond the user count
        // can never be used.
        for _ in 0..cap.min(num_users) {
            slot_uav.push(m);
        }
    }
    let num_slots = slot_uav.len();
    let n = num_users.max(num_slots);

    // Square cost matrix padded with zero-cost dummies: dummy slots absorb
    // the overflow users whose exclusion minimizes the total cost, and dummy
    // users absorb surplus slots.
    let mut costs = vec![vec![0.0; n]; n];
    for (k, user) in users.iter().enumerate() {
        for (s, &m) in slot_uav.iter().enumerate() {
            let d = user.position.ground_distance(&positions[m]);
            costs[k][s] = d * d;
        }
    }
    let row_to_col = dense_min_cost(&costs);

    let mut matrix = AssignmentMatrix::new(num_users, capacities.to_vec());
    for (k, &s) in row_to_col.iter().enumerate().take(num_users) {
        if s < num_slots {
            matrix.assign(k, slot_uav[s]);
        }
    }
    matrix
}

/// Fresh random centroid start for the benchmark clusterings: the cited
/// schemes solve a static placement problem, so each macro-slot rerun
/// re-initializes blindly instead of warm-starting from the fleet. Centroid
/// `m` keeps UAV `m`'s altitude.
fn random_centroids<R: Rng + ?Sized>(
    uavs: &[UavState],
    region: &Region,
    rng: &mut R,
) -> Vec<Point3> {
    uavs.iter()
        .map(|u| {
            Point3::new(
                rng.random_range(0.0..region.width),
                rng.random_range(0.0..region.height),
                u.position.z,
            )
        })
        .collect()
}

/// Path-loss K-means baseline clustering: each user joins the centroid with
/// the least path loss (equivalently the nearest in 3-D at the centroid's
/// altitude), centroids move to the unweighted mean of their members.
/// LoS- and capacity-blind; returns the converged centroid per UAV slot.
pub fn baseline_pathloss_kmeans<R: Rng + ?Sized>(
    users: &[UserState],
    uavs: &[UavState],
    region: &Region,
    tol: f64,
    max_iterations: usize,
    rng: &mut R,
) -> Vec<Point3> {
    let mut centroids = random_centroids(uavs, region, rng);
    for _ in 0..max_iterations {
        let mut sums = vec![(0.0, 0.0, 0usize); centroids.len()];
        for user in users {
            let nearest = (0..centroids.len())
                .min_by(|&a, &b| {
                    user.position
                        .distance(&centroids[a])
                        .partial_cmp(&user.position.distance(&centroids[b]))
                        .unwrap()
                })
                .expect("at least one UAV");
            sums[nearest].0 += user.position.x;
            sums[nearest].1 += user.position.y;
            sums[nearest].2 += 1;
        }
        let mut moved: f64 = 0.0;
        for (m, (sx, sy, count)) in sums.into_iter().enumerate() {
            if count == 0 {
                continue;
            }
            let next = Point3::new(sx / count as f64, sy / count as f64, centroids[m].z);
            moved = moved.max(next.ground_distance(&centroids[m]));
            centroids[m] = next;
        }
        if moved < tol {
            break;
        }
    }
    centroids
}

/// Balanced K-means baseline: alternate the balanced matching with plain
/// (unweighted) centroid updates until the centroids settle, then report the
/// assignment at the final centroids. Starts from a fresh random placement
/// like the path-loss variant.
pub fn baseline_balanced_kmeans<R: Rng + ?Sized>(
    users: &[UserState],
    uavs: &[UavState],
    region: &Region,
    tol: f64,
    max_iterations: usize,
    rng: &mut R,
) -> (Vec<Point3>, AssignmentMatrix) {
    let capacities: Vec<usize> = uavs.iter().map(|u| u.capacity).collect();
    let mut centroids = random_centroids(uavs, region, rng);
    for _ in 0..max_iterations {
        let matrix = balanced_assignment(users, &centroids, &capacities);
        let mut moved: f64 = 0.0;
        for m in 0..centroids.len() {
            let members: Vec<Point3> = matrix
                .pairs()
                .filter(|&(_, uav)| uav == m)
                .map(|(k, _)| users[k].position)
                .collect();
            if members.is_empty() {
                continue;
            }
            let x = members.iter().map(|p| p.x).sum::<f64>() / members.len() as f64;
            let y = members.iter().map(|p| p.y).sum::<f64>() / members.len() as f64;
            let next = Point3::new(x, y, centroids[m].z);
            moved = moved.max(next.ground_distance(&centroids[m]));
            centroids[m] = next;
        }
        if moved < tol {
            break;
        }
    }
    let matrix = balanced_assignment(users, &centroids, &capacities);
    (centroids, matrix)
}
