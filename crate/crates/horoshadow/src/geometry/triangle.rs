use super::geodesic::{gromov_product, point_towards, Geodesic, Vertex};
use super::{GeometryError, Mobius, Point};

/// Inscribed triangle `(p, q, r)` of `(a, b, c)`, with `p ∈ [bc]`,
/// `q ∈ [ac]`, `r ∈ [ab]`.
pub fn inscribed_triangle(
    a: Vertex,
    b: Vertex,
    c: Vertex,
) -> Result<(Point, Point, Point), GeometryError> {
    check_distinct(a, b)?;
    check_distinct(b, c)?;
    check_distinct(a, c)?;
    if let (Vertex::Ideal(u), Vertex::Ideal(v), Vertex::Ideal(w)) = (a, b, c) {
        return ideal_inscribed(u, v, w);
    }
    let finite_side = |u: Vertex, v: Vertex, w: Vertex| -> Result<Option<Point>, GeometryError> {
        match (u, v) {
            (Vertex::Finite(x), _) => Ok(Some(point_towards(x, v, gromov_product(x, v, w)?)?)),
            (_, Vertex::Finite(y)) => Ok(Some(point_towards(y, u, gromov_product(y, u, w)?)?)),
            _ => Ok(None),
        }
    };
    let p = finite_side(b, c, a)?;
    let q = finite_side(a, c, b)?;
    let r = finite_side(a, b, c)?;
    // A side with two ideal endpoints: match the Busemann level of the
    // inscribed point on a neighbouring side.
    let fill = |u: Vertex, w: Vertex, neighbour: Point| -> Result<Point, GeometryError> {
        let (Vertex::Ideal(u), Vertex::Ideal(w)) = (u, w) else {
            unreachable!()
        };
        let g = Geodesic::new(w, u)?;
        Ok(g.point_at(g.frame().apply(neighbour).im.ln()))
    };
    let p = match p {
        Some(p) => p,
        None => fill(b, c, r.expect("a is finite"))?,
    };
    let q = match q {
        Some(q) => q,
        None => fill(a, c, r.expect("b is finite"))?,
    };
    let r = match r {
        Some(r) => r,
        None => fill(a, b, q)?,
    };
    Ok((p, q, r))
}

fn check_distinct(u: Vertex, v: Vertex) -> Result<(), GeometryError> {
    let same = match (u, v) {
        (Vertex::Finite(x), Vertex::Finite(y)) => x == y,
        (Vertex::Ideal(x), Vertex::Ideal(y)) => x == y,
        _ => false,
    };
    if same {
        Err(GeometryError::CoincidentVertices)
    } else {
        Ok(())
    }
}

fn ideal_inscribed(
    a: super::BoundaryPoint,
    b: super::BoundaryPoint,
    c: super::BoundaryPoint,
) -> Result<(Point, Point, Point), GeometryError> {
    let f = Mobius::axis_frame(a, c);
    let super::BoundaryPoint::Real(bb) = f.apply_boundary(b) else {
        return Err(GeometryError::CoincidentVertices);
    };
    if bb == 0.0 {
        return Err(GeometryError::CoincidentVertices);
    }
    let s = (2.0 / bb.abs()).sqrt();
    let shift = if bb > 0.0 { -1.0 } else { 1.0 };
    let affine = Mobius::raw(s, shift / s, 0.0, 1.0 / s);
    let back = affine.compose(&f).inverse();
    let left = back.apply(Point::new(-1.0, 2.0));
    let right = back.apply(Point::new(1.0, 2.0));
    let mid = back.apply(Point::new(0.0, 1.0));
    if bb > 0.0 {
        Ok((right, left, mid))
    } else {
        Ok((left, right, mid))
    }
}
