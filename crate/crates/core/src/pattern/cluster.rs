//! Spanning-cluster detection by union-find.

use super::renorm::RenormField;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "too many elements");
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// True when some cluster of active sites touches both the first and the last
/// time row. Space wraps when `spatial_periodic` is set.
pub fn spanning(rf: &RenormField, spatial_periodic: bool) -> bool {
    let (w, h) = (rf.width(), rf.height());
    if w == 0 || h == 0 {
        return false;
    }
    let idx = |x: usize, t: usize| t * w + x;
    // a run of empty rows at least as long as the largest time offset cuts every path
    let reach = rf.adjacency().iter().map(|o| o.1.unsigned_abs()).max().unwrap_or(0).max(1);
    let mut empty_run = 0;
    for t in 0..h {
        if rf.cells()[t * w..(t + 1) * w].iter().any(|&c| c) {
            empty_run = 0;
        } else {
            empty_run += 1;
            if empty_run >= reach {
                return false;
            }
        }
    }

    // adjacency is symmetric, so half of the offsets reach every pair
    let forward: Vec<_> = rf
        .adjacency()
        .iter()
        .copied()
        .filter(|&(dx, dt)| dt > 0 || (dt == 0 && dx > 0))
        .collect();

    let wi = w as isize;
    let cells = rf.cells();
    let mut uf = UnionFind::new(w * h);
    for t in 0..h {
        let row = &cells[t * w..(t + 1) * w];
        for (x, _) in row.iter().enumerate().filter(|(_, &c)| c) {
            for &(dx, dt) in &forward {
                let nt = t + dt as usize;
                if dt < 0 || nt >= h {
                    continue;
                }
                let mut nx = x as isize + dx;
                if nx < 0 || nx >= wi {
                    if !spatial_periodic {
                        continue;
                    }
                    nx = nx.rem_euclid(wi);
                }
                let j = idx(nx as usize, nt);
                if cells[j] {
                    uf.union(idx(x, t), j);
                }
            }
        }
    }

    let mut top_roots: Vec<usize> = (0..w).filter(|&x| rf.get(x, 0)).map(|x| uf.find(idx(x, 0))).collect();
    top_roots.sort_unstable();
    (0..w)
        .filter(|&x| rf.get(x, h - 1))
        .any(|x| top_roots.binary_search(&uf.find(idx(x, h - 1))).is_ok())
}
