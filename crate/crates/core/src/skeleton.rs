//! Zhang-Suen thinning of the binarized ridge map.
//!
//! Neighbours of a pixel `p1` are named clockwise from north:
//!
//! ```text
//! p9 p2 p3
//! p8 p1 p4
//! p7 p6 p5
//! ```
//!
//! Out-of-bounds neighbours read as background.

use crate::imgops::{BinaryImage, Connectivity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subiteration {
    First,
    Second,
}

/// `[p2, p3, ..., p9]` at `(x, y)`.
pub fn neighbours(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [
        img.get_or_false(x, y - 1),
        img.get_or_false(x + 1, y - 1),
        img.get_or_false(x + 1, y),
        img.get_or_false(x + 1, y + 1),
        img.get_or_false(x, y + 1),
        img.get_or_false(x - 1, y + 1),
        img.get_or_false(x - 1, y),
        img.get_or_false(x - 1, y - 1),
    ]
}

/// Number of background-to-foreground transitions in the circular sequence
/// p2, p3, ..., p9, p2.
pub fn transitions(n: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count()
}

fn deletable(n: &[bool; 8], step: Subiteration) -> bool {
    let b = n.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) || transitions(n) != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = *n;
    match step {
        Subiteration::First => !(p2 && p4 && p6) && !(p4 && p6 && p8),
        Subiteration::Second => !(p2 && p4 && p8) && !(p2 && p6 && p8),
    }
}

/// One subiteration: every deletion condition is evaluated on `img`, then all
/// marked pixels are removed together.
///
/// A component whose pixels are all marked at once (a 2×2 block, say) would
/// vanish; its first pixel in raster order is kept instead.
pub fn thin_pass(img: &BinaryImage, step: Subiteration) -> (BinaryImage, usize) {
    let (w, h) = img.dims();
    let mut marked = vec![false; w * h];
    for (x, y) in img.foreground() {
        marked[y * w + x] = deletable(&neighbours(img, x, y), step);
    }
    spare_vanishing_components(img, &mut marked);
    let mut out = img.clone();
    let mut deleted = 0;
    for (i, _) in marked.iter().enumerate().filter(|(_, &m)| m) {
        out.put(i % w, i / w, false);
        deleted += 1;
    }
    (out, deleted)
}

/// Unmarks the first pixel of every component that is marked in full.
fn spare_vanishing_components(img: &BinaryImage, marked: &mut [bool]) {
    let (w, h) = img.dims();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !marked[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut survives = false;
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in Connectivity::Eight.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if !img.get_or_false(nx, ny) {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !marked[j] {
                    survives = true;
                } else if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if !survives {
            marked[start] = false;
        }
    }
}

/// Repeats both subiterations until a full iteration deletes nothing.
pub fn zhang_suen_thin(img: &BinaryImage) -> BinaryImage {
    let mut current = img.clone();
    loop {
        let (after_first, d1) = thin_pass(&current, Subiteration::First);
        let (after_second, d2) = thin_pass(&after_first, Subiteration::Second);
        current = after_second;
        if d1 + d2 == 0 {
            return current;
        }
    }
}

/// Removes redundant corner pixels from 4-connected staircases, scanning in
/// place in raster order. A pixel is removed when exactly two perpendicular
/// 4-neighbours are set and the three pixels on the far side of the corner
/// are clear; those two neighbours are diagonal to each other, so 8-connectivity
/// and line ends are unchanged. Returns the number of pixels removed.
pub fn remove_staircases(img: &mut BinaryImage) -> usize {
    let mut removed = 0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !img.get(x, y) {
                continue;
            }
            let [n, ne, e, se, s, sw, w, nw] = neighbours(img, x, y);
            let corner = (n && e && !s && !w && !sw)
                || (e && s && !n && !w && !nw)
                || (s && w && !n && !e && !ne)
                || (w && n && !s && !e && !se);
            if corner {
                img.put(x, y, false);
                removed += 1;
            }
        }
    }
    removed
}
