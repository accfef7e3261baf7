//! Square spiral over the integer lattice:
//! `(0,0), (1,0), (1,1), (0,1), (-1,1), (-1,0), (-1,-1), (0,-1), (1,-1), (2,-1), …`
//!
//! Ring `k ≥ 1` is the boundary of the `(2k+1)²` square and holds indices
//! `(2k-1)² .. (2k+1)²`. Each ring starts just right of the previous
//! ring's last point and runs up, left, down and right.

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralState {
    pub index: u64,
    /// Lattice origin in millimetres.
    pub origin_mm: [f64; 2],
    pub spacing_mm: f64,
}

impl Default for SpiralState {
    fn default() -> Self {
        SpiralState {
            index: 0,
            origin_mm: [0.0, 0.0],
            spacing_mm: 1.0,
        }
    }
}

impl SpiralState {
    pub fn position_mm(&self) -> [f64; 2] {
        let (i, j) = spiral_position(self.index);
        [
            self.origin_mm[0] + self.spacing_mm * i as f64,
            self.origin_mm[1] + self.spacing_mm * j as f64,
        ]
    }
}

/// Advances to the next spiral point and returns it, in millimetres.
pub fn spiral_next(state: &mut SpiralState) -> [f64; 2] {
    state.index += 1;
    state.position_mm()
}

fn ring_of(index: u64) -> u64 {
    let mut k = 0;
    while (2 * k + 1) * (2 * k + 1) <= index {
        k += 1;
    }
    k
}

/// Lattice point visited at `index`.
pub fn spiral_position(index: u64) -> (i64, i64) {
    if index == 0 {
        return (0, 0);
    }
    let k = ring_of(index);
    let start = (2 * k - 1) * (2 * k - 1);
    let m = index - start;
    let side = m / (2 * k);
    let t = (m % (2 * k)) as i64;
    let k = k as i64;
    match side {
        0 => (k, -k + 1 + t),
        1 => (k - 1 - t, k),
        2 => (-k, k - 1 - t),
        _ => (-k + 1 + t, -k),
    }
}

/// Inverse of [`spiral_position`].
pub fn spiral_index_of(point: (i64, i64)) -> u64 {
    let (x, y) = point;
    let k = x.abs().max(y.abs());
    if k == 0 {
        return 0;
    }
    let start = ((2 * k - 1) * (2 * k - 1)) as u64;
    let side_len = 2 * k;
    let m = if x == k && y > -k {
        y + k - 1
    } else if y == k {
        side_len + (k - 1 - x)
    } else if x == -k {
        2 * side_len + (k - 1 - y)
    } else {
        3 * side_len + (x + k - 1)
    };
    start + m as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        let got: Vec<_> = (0..4).map(spiral_position).collect();
        assert_eq!(got, vec![(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(spiral_position(8), (1, -1));
        assert_eq!(spiral_position(9), (2, -1));
    }

    #[test]
    fn index_eight_closes_first_ring() {
        let mut ring: Vec<_> = (0..=8).map(spiral_position).collect();
        ring.sort_unstable();
        let mut square: Vec<_> = (-1..=1).flat_map(|x| (-1..=1).map(move |y| (x, y))).collect();
        square.sort_unstable();
        assert_eq!(ring, square);
    }

    #[test]
    fn inverse_round_trip() {
        for i in 0..2000 {
            assert_eq!(spiral_index_of(spiral_position(i)), i);
        }
    }

    #[test]
    fn state_walks_in_millimetres() {
        let mut s = SpiralState {
            origin_mm: [0.5, -0.5],
            spacing_mm: 2.0,
            ..SpiralState::default()
        };
        assert_eq!(spiral_next(&mut s), [2.5, -0.5]);
        assert_eq!(spiral_next(&mut s), [2.5, 1.5]);
        assert_eq!(spiral_position(5), spiral_position(5));
    }
}
