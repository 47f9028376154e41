//! Planar polygon primitives shared by every stage.
//!
//! Coordinates are frame-agnostic `f64` pairs: parsers produce WGS84
//! degrees (`x` = longitude, `y` = latitude) and [`crate::geodata::LocalProjection`]
//! maps them into a local metric frame. Every predicate here is invariant
//! under the axis-scaling that projection applies.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    /// Rotation about the origin by `angle` radians, counter-clockwise.
    pub fn rotate(&self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn centered(center: Point, width: f64, height: f64) -> Self {
        Self {
            min: Point::new(center.x - width / 2.0, center.y - height / 2.0),
            max: Point::new(center.x + width / 2.0, center.y + height / 2.0),
        }
    }

    /// Bounding box of a point set; `None` when empty.
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    /// Half-open containment: `[min, max)` on both axes.
    pub fn contains_half_open(&self, p: &Point) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::from_exterior(vec![
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ])
    }
}

/// Signed shoelace area of a ring. Positive for counter-clockwise winding.
/// Works for closed (first == last) and open rings alike.
pub fn signed_area(ring: &[Point]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Length of the closed ring boundary.
pub fn ring_perimeter(ring: &[Point]) -> f64 {
    if ring.len() < 2 {
        return 0.0;
    }
    (0..ring.len())
        .map(|i| ring[i].distance(&ring[(i + 1) % ring.len()]))
        .sum()
}

/// Ring vertices without the repeated closing point.
pub fn open_ring(ring: &[Point]) -> &[Point] {
    if ring.len() > 1 && ring.first() == ring.last() {
        &ring[..ring.len() - 1]
    } else {
        ring
    }
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// A ring is simple when no two non-adjacent edges meet and adjacent edges
/// share only their common vertex. Expects an open ring (no closing point).
pub fn ring_is_simple(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if ring[i] == ring[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared vertex is expected; a fold-back along the same line is not.
                let shared = if j == i + 1 { b } else { a };
                let (p, q) = if j == i + 1 { (a, d) } else { (c, b) };
                if orient(&p, &shared, &q) == 0.0 {
                    let u = (p.x - shared.x, p.y - shared.y);
                    let v = (q.x - shared.x, q.y - shared.y);
                    if u.0 * v.0 + u.1 * v.1 > 0.0 {
                        return false;
                    }
                }
                continue;
            }
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}

/// Crossing-number point-in-ring test. Points exactly on an edge may land
/// either way; callers that need strictness check the boundary separately.
pub fn point_in_ring(ring: &[Point], p: &Point) -> bool {
    let ring = open_ring(ring);
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Whether `p` lies on any edge of the ring (within a relative tolerance).
pub fn point_on_ring(ring: &[Point], p: &Point) -> bool {
    let ring = open_ring(ring);
    let n = ring.len();
    (0..n).any(|i| {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        let len = a.distance(&b);
        let tol = 1e-12 * len.max(1.0);
        orient(&a, &b, p).abs() <= tol * len && on_segment(&a, &b, p)
    })
}

/// A polygon with one exterior ring and zero or more holes. Rings are
/// stored open (no repeated closing vertex). After [`Polygon::normalize`]
/// the exterior winds counter-clockwise and holes clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

impl Polygon {
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Self {
        Self { exterior, holes }
    }

    pub fn from_exterior(exterior: Vec<Point>) -> Self {
        Self::new(exterior, Vec::new())
    }

    /// Drops closing vertices and fixes winding: exterior CCW, holes CW.
    pub fn normalize(mut self) -> Self {
        fn fix(ring: &mut Vec<Point>, ccw: bool) {
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
            if (signed_area(ring) > 0.0) != ccw {
                ring.reverse();
            }
        }
        fix(&mut self.exterior, true);
        for h in &mut self.holes {
            fix(h, false);
        }
        self
    }

    /// Exterior ring with the closing vertex appended.
    pub fn closed_exterior(&self) -> Vec<Point> {
        let mut ring = self.exterior.clone();
        if let Some(first) = ring.first().copied() {
            ring.push(first);
        }
        ring
    }

    /// Net area: exterior minus holes.
    pub fn area(&self) -> f64 {
        signed_area(&self.exterior).abs()
            - self.holes.iter().map(|h| signed_area(h).abs()).sum::<f64>()
    }

    pub fn exterior_perimeter(&self) -> f64 {
        ring_perimeter(&self.exterior)
    }

    pub fn bbox(&self) -> Option<Rect> {
        Rect::of_points(&self.exterior)
    }

    /// Area-weighted centroid of the exterior minus holes.
    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut total = 0.0;
        let rings = std::iter::once((&self.exterior, 1.0)).chain(self.holes.iter().map(|h| (h, -1.0)));
        for (ring, sign) in rings {
            let n = ring.len();
            if n < 3 {
                continue;
            }
            // Shift to the first vertex to limit cancellation on geographic coordinates.
            let o = ring[0];
            let mut a = 0.0;
            let mut x = 0.0;
            let mut y = 0.0;
            for i in 0..n {
                let p = ring[i].translate(-o.x, -o.y);
                let q = ring[(i + 1) % n].translate(-o.x, -o.y);
                let cross = p.x * q.y - q.x * p.y;
                a += cross;
                x += (p.x + q.x) * cross;
                y += (p.y + q.y) * cross;
            }
            a /= 2.0;
            if a == 0.0 {
                continue;
            }
            let w = sign * a.abs();
            cx += w * (x / (6.0 * a) + o.x);
            cy += w * (y / (6.0 * a) + o.y);
            total += w;
        }
        if total == 0.0 {
            let n = self.exterior.len().max(1) as f64;
            let sx: f64 = self.exterior.iter().map(|p| p.x).sum();
            let sy: f64 = self.exterior.iter().map(|p| p.y).sum();
            return Point::new(sx / n, sy / n);
        }
        Point::new(cx / total, cy / total)
    }

    /// Interior containment: inside the exterior and outside every hole.
    pub fn contains(&self, p: &Point) -> bool {
        point_in_ring(&self.exterior, p) && !self.holes.iter().any(|h| point_in_ring(h, p))
    }

    /// Strict interior containment, excluding all ring boundaries.
    pub fn contains_strict(&self, p: &Point) -> bool {
        self.contains(p)
            && !point_on_ring(&self.exterior, p)
            && !self.holes.iter().any(|h| point_on_ring(h, p))
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Polygon {
        Polygon {
            exterior: self.exterior.iter().map(&f).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(&f).collect()).collect(),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        self.map_points(|p| p.translate(dx, dy))
    }

    pub fn rotate(&self, angle: f64) -> Polygon {
        self.map_points(|p| p.rotate(angle))
    }

    /// Sutherland-Hodgman clip of every ring against an axis-aligned box.
    /// Returns `None` when nothing of the exterior survives.
    pub fn clip_to_rect(&self, rect: &Rect) -> Option<Polygon> {
        let exterior = clip_ring(&self.exterior, rect);
        if exterior.len() < 3 || signed_area(&exterior).abs() == 0.0 {
            return None;
        }
        let holes = self
            .holes
            .iter()
            .map(|h| clip_ring(h, rect))
            .filter(|h| h.len() >= 3 && signed_area(h).abs() > 0.0)
            .collect();
        Some(Polygon { exterior, holes })
    }
}

fn clip_ring(ring: &[Point], rect: &Rect) -> Vec<Point> {
    #[derive(Clone, Copy)]
    enum Edge {
        Left(f64),
        Right(f64),
        Bottom(f64),
        Top(f64),
    }
    impl Edge {
        fn inside(&self, p: &Point) -> bool {
            match *self {
                Edge::Left(v) => p.x >= v,
                Edge::Right(v) => p.x <= v,
                Edge::Bottom(v) => p.y >= v,
                Edge::Top(v) => p.y <= v,
            }
        }
        fn cut(&self, a: &Point, b: &Point) -> Point {
            match *self {
                Edge::Left(v) | Edge::Right(v) => {
                    let t = (v - a.x) / (b.x - a.x);
                    Point::new(v, a.y + t * (b.y - a.y))
                }
                Edge::Bottom(v) | Edge::Top(v) => {
                    let t = (v - a.y) / (b.y - a.y);
                    Point::new(a.x + t * (b.x - a.x), v)
                }
            }
        }
    }

    let mut out: Vec<Point> = open_ring(ring).to_vec();
    for edge in [
        Edge::Left(rect.min.x),
        Edge::Right(rect.max.x),
        Edge::Bottom(rect.min.y),
        Edge::Top(rect.max.y),
    ] {
        if out.is_empty() {
            break;
        }
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            match (edge.inside(&prev), edge.inside(&cur)) {
                (true, true) => out.push(cur),
                (true, false) => out.push(edge.cut(&prev, &cur)),
                (false, true) => {
                    out.push(edge.cut(&prev, &cur));
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}
