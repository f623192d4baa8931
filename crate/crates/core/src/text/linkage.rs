use serde::Serialize;

use crate::{Error, Result, Scalar};

/// One agglomeration step. Leaves are `0..n`; the cluster created by merge
/// `i` has id `n + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Merge<T: Scalar> {
    pub left: usize,
    pub right: usize,
    pub distance: T,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dendrogram<T: Scalar> {
    pub merges: Vec<Merge<T>>,
    /// Leaves in left-to-right dendrogram order.
    pub leaf_order: Vec<usize>,
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

/// UPGMA clustering of the rows under Euclidean distance. Ties merge the
/// pair with the smallest cluster ids first.
pub fn average_linkage<T: Scalar>(rows: &[Vec<T>]) -> Result<Dendrogram<T>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::invalid("cannot cluster zero rows"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("rows must be finite"));
    }
    // active clusters: (id, size, members)
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut dist: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| euclidean(&rows[i], &rows[j])).collect()).collect();
    let mut children: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best = (0, 1);
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let d = dist[i][j];
                let cur = dist[best.0][best.1];
                let key = (active[i].0.min(active[j].0), active[i].0.max(active[j].0));
                let best_key = (active[best.0].0.min(active[best.1].0), active[best.0].0.max(active[best.1].0));
                if d < cur || (d == cur && key < best_key) {
                    best = (i, j);
                }
            }
        }
        let (i, j) = best;
        let (id_i, id_j) = (active[i].0, active[j].0);
        let (left, right) = (id_i.min(id_j), id_i.max(id_j));
        let (ni, nj) = (active[i].1.len(), active[j].1.len());
        let merged_dist: Vec<T> = (0..active.len())
            .map(|k| (dist[i][k] * T::count(ni) + dist[j][k] * T::count(nj)) / T::count(ni + nj))
            .collect();
        merges.push(Merge { left, right, distance: dist[i][j], size: ni + nj });
        children.push((left, right));
        let mut members = active[i].1.clone();
        members.extend(active[j].1.iter().copied());
        let new_id = n + merges.len() - 1;
        // replace i by the merged cluster and drop j (j > i)
        active[i] = (new_id, members);
        for k in 0..active.len() {
            dist[i][k] = merged_dist[k];
            dist[k][i] = merged_dist[k];
        }
        dist[i][i] = T::zero();
        active.remove(j);
        dist.remove(j);
        for row in dist.iter_mut() {
            row.remove(j);
        }
    }
    let mut leaf_order = Vec::with_capacity(n);
    let mut stack = vec![active[0].0];
    while let Some(id) = stack.pop() {
        if id < n {
            leaf_order.push(id);
        } else {
            let (l, r) = children[id - n];
            stack.push(r);
            stack.push(l);
        }
    }
    Ok(Dendrogram { merges, leaf_order })
}
