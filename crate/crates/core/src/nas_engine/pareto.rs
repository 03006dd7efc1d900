use serde::{Deserialize, Serialize};

/// Search objectives: maximise accuracy, minimise parameters and MACs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub accuracy: f64,
    pub params: usize,
    pub macs: u64,
}

pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    let no_worse = a.accuracy >= b.accuracy && a.params <= b.params && a.macs <= b.macs;
    let better = a.accuracy > b.accuracy || a.params < b.params || a.macs < b.macs;
    no_worse && better
}

/// Fast non-dominated sort. Returns fronts of indices into `objs`, best
/// front first, each ordered by `ids`.
pub fn nondominated_sort(objs: &[Objectives], ids: &[u64]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objs[i], &objs[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current.sort_by_key(|&i| (ids[i], i));
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Front rank (0 = non-dominated) per individual.
pub fn front_ranks(objs: &[Objectives], ids: &[u64]) -> Vec<usize> {
    let mut rank = vec![0; objs.len()];
    for (r, front) in nondominated_sort(objs, ids).iter().enumerate() {
        for &i in front {
            rank[i] = r;
        }
    }
    rank
}

/// NSGA-II crowding distance within one front. Boundary members are
/// infinite; an objective with zero range contributes nothing.
pub fn crowding_distance(front: &[Objectives]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0f64; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let keys: [fn(&Objectives) -> f64; 3] =
        [|o| o.accuracy, |o| o.params as f64, |o| o.macs as f64];
    for key in keys {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| key(&front[a]).total_cmp(&key(&front[b])).then(a.cmp(&b)));
        let lo = key(&front[order[0]]);
        let hi = key(&front[order[n - 1]]);
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = key(&front[order[w + 1]]) - key(&front[order[w - 1]]);
            d[order[w]] += gap / range;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(accuracy: f64, params: usize, macs: u64) -> Objectives {
        Objectives {
            accuracy,
            params,
            macs,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(
            &o(0.9, 10_000, 1_000_000),
            &o(0.8, 20_000, 2_000_000)
        ));
        assert!(!dominates(&o(0.9, 10_000, 1), &o(0.9, 10_000, 1)));
        assert!(!dominates(
            &o(0.9, 30_000, 1_000_000),
            &o(0.8, 20_000, 2_000_000)
        ));
    }

    #[test]
    fn sort_examples() {
        let trade = [o(0.9, 30, 3), o(0.8, 20, 2), o(0.7, 10, 1)];
        assert_eq!(nondominated_sort(&trade, &[0, 1, 2]), vec![vec![0, 1, 2]]);
        let chain = [o(0.7, 30, 3), o(0.9, 10, 1), o(0.8, 20, 2)];
        assert_eq!(
            nondominated_sort(&chain, &[0, 1, 2]),
            vec![vec![1], vec![2], vec![0]]
        );
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(
            crowding_distance(&[o(0.5, 1, 1), o(0.6, 2, 1)]),
            vec![f64::INFINITY; 2]
        );
        let line = [o(0.5, 10, 7), o(0.6, 20, 7), o(0.7, 30, 7)];
        let d = crowding_distance(&line);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);
        let same = [o(0.5, 10, 7); 4];
        let d = crowding_distance(&same);
        assert!(d[0].is_infinite() && d[3].is_infinite());
        assert_eq!(&d[1..3], &[0.0, 0.0]);
    }
}
