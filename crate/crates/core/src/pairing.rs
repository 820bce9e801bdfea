//! Number codings shared by the machine, the oracles and the constructions.
//!
//! All codings work on `u64` naturals. Encoders return `None` when the code
//! would not fit; decoders are total.

/// Natural numbers as seen by programs and oracles.
pub type Nat = u64;

/// Cantor pairing `⟨x, y⟩ = (x + y)(x + y + 1)/2 + y`.
pub fn pair(x: Nat, y: Nat) -> Option<Nat> {
    let s = x as u128 + y as u128;
    let v = s * (s + 1) / 2 + y as u128;
    u64::try_from(v).ok()
}

/// Inverse of [`pair`].
pub fn unpair(z: Nat) -> (Nat, Nat) {
    let z = z as u128;
    // w = floor((sqrt(8z + 1) - 1) / 2), corrected for float error
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u128;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let t = w * (w + 1) / 2;
    let y = z - t;
    let x = w - y;
    (x as Nat, y as Nat)
}

/// Triple coding `⟨a, b, c⟩ = ⟨a, ⟨b, c⟩⟩`, used for meet points and level inputs.
pub fn triple(a: Nat, b: Nat, c: Nat) -> Option<Nat> {
    pair(a, pair(b, c)?)
}

pub fn untriple(z: Nat) -> (Nat, Nat, Nat) {
    let (a, bc) = unpair(z);
    let (b, c) = unpair(bc);
    (a, b, c)
}

/// Bijective coding of finite sequences: the set bits of the code are at
/// positions `p1 < p2 < ...`, and the sequence lists the gaps
/// `(p1, p2 - p1 - 1, ...)`. The empty sequence is `0`.
pub fn encode_list(items: &[Nat]) -> Option<Nat> {
    let mut code: u64 = 0;
    let mut pos: u64 = 0;
    for (i, &x) in items.iter().enumerate() {
        let step = if i == 0 { x } else { x.checked_add(1)? };
        pos = pos.checked_add(step)?;
        if pos >= 64 {
            return None;
        }
        code |= 1u64 << pos;
    }
    Some(code)
}

pub fn decode_list(code: Nat) -> Vec<Nat> {
    let mut out = Vec::new();
    let mut prev: Option<u32> = None;
    let mut rest = code;
    while rest != 0 {
        let p = rest.trailing_zeros();
        rest &= rest - 1;
        let gap = match prev {
            None => p as Nat,
            Some(q) => (p - q - 1) as Nat,
        };
        out.push(gap);
        prev = Some(p);
    }
    out
}

/// Radix-256 tuple coding used by the multi-way meet: the low byte holds the
/// length and each further byte one component. Components must be `< 256`.
pub fn encode_radix(items: &[Nat]) -> Option<Nat> {
    if items.len() > 7 {
        return None;
    }
    let mut code: u64 = 0;
    for &x in items.iter().rev() {
        if x >= 256 {
            return None;
        }
        code = (code << 8) | x;
    }
    Some((code << 8) | items.len() as u64)
}

/// Inverse of [`encode_radix`]; `None` for codes that are not well formed.
pub fn decode_radix(code: Nat) -> Option<Vec<Nat>> {
    let len = (code & 0xff) as usize;
    if len > 7 {
        return None;
    }
    let mut rest = code >> 8;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(rest & 0xff);
        rest >>= 8;
    }
    if rest != 0 {
        return None;
    }
    Some(out)
}
