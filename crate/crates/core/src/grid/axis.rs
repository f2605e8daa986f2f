use crate::dyadic::DyadicRational;
use crate::error::GridError;

/// Nesting bits `b_m` for `m >= M` (after the finite prefix).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BitTail {
    AllZero,
    AllOne,
    /// Repeats forever; never all-equal and at least two bits long.
    Periodic(Vec<bool>),
}

impl BitTail {
    /// Builds a periodic tail, folding constant patterns into `AllZero`/`AllOne`.
    pub fn periodic(pattern: Vec<bool>) -> Result<Self, GridError> {
        if pattern.is_empty() {
            return Err(GridError::InvalidSpec("empty periodic tail".into()));
        }
        if pattern.iter().all(|b| !b) {
            return Ok(BitTail::AllZero);
        }
        if pattern.iter().all(|&b| b) {
            return Ok(BitTail::AllOne);
        }
        Ok(BitTail::Periodic(pattern))
    }

    fn is_canonical(&self) -> bool {
        match self {
            BitTail::Periodic(p) => p.len() >= 2 && p.iter().any(|&b| b) && p.iter().any(|&b| !b),
            _ => true,
        }
    }

    fn bit(&self, j: u64) -> bool {
        match self {
            BitTail::AllZero => false,
            BitTail::AllOne => true,
            BitTail::Periodic(p) => p[(j % p.len() as u64) as usize],
        }
    }

    pub fn is_eventually_constant(&self) -> bool {
        !matches!(self, BitTail::Periodic(_))
    }
}

/// One axis of a dyadic grid.
///
/// The scale-`m` tiling is `s_m + 2^m Z` where `s_{m+1} = s_m + b_m 2^m` for
/// `m >= 0` and `s_m = s_0 mod 2^m` for `m < 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridAxis {
    base_offset: DyadicRational,
    prefix: Vec<bool>,
    tail: BitTail,
}

impl GridAxis {
    pub fn new(base_offset: DyadicRational, prefix: Vec<bool>, tail: BitTail) -> Result<Self, GridError> {
        if base_offset.is_negative() || base_offset >= DyadicRational::from_int(1) {
            return Err(GridError::OffsetOutOfRange(base_offset.to_string()));
        }
        let tail = match tail {
            BitTail::Periodic(p) => BitTail::periodic(p)?,
            t => t,
        };
        debug_assert!(tail.is_canonical());
        Ok(Self {
            base_offset,
            prefix,
            tail,
        })
    }

    pub fn standard() -> Self {
        Self {
            base_offset: DyadicRational::zero(),
            prefix: Vec::new(),
            tail: BitTail::AllZero,
        }
    }

    pub fn base_offset(&self) -> &DyadicRational {
        &self.base_offset
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn tail(&self) -> &BitTail {
        &self.tail
    }

    /// Nesting bit `b_m`, `m >= 0`.
    pub fn bit(&self, m: u64) -> bool {
        let len = self.prefix.len() as u64;
        if m < len {
            self.prefix[m as usize]
        } else {
            self.tail.bit(m - len)
        }
    }

    /// Offset `s_m` of the scale-`m` tiling; in `[0, 2^m)` for every `m`.
    pub fn offset(&self, m: i64) -> DyadicRational {
        if m <= 0 {
            return self.base_offset.mod_pow2(m);
        }
        let mut s = self.base_offset.clone();
        for j in 0..m {
            if self.bit(j as u64) {
                s = &s + &DyadicRational::pow2(j);
            }
        }
        s
    }

    /// The 2-adic limit of the offsets when the bits are eventually constant.
    ///
    /// This is the finite endpoint shared by the two tops along this axis.
    pub fn boundary(&self) -> Option<DyadicRational> {
        let m = self.prefix.len() as i64;
        match self.tail {
            BitTail::AllZero => Some(self.offset(m)),
            BitTail::AllOne => Some(&self.offset(m) - &DyadicRational::pow2(m)),
            BitTail::Periodic(_) => None,
        }
    }
}
