//! Segmented growable slot store.
//!
//! Storage is a directory of segments where segment `k` holds exactly `2^k`
//! slots. A segment is allocated once with its final capacity and never
//! grows, so a payload written at index `i` stays at the same address until
//! it is freed. Index `i` lives in segment `floor(log2(i + 1))` at offset
//! `i + 1 - 2^k`.
//!
//! Freed slots become holes threaded into an intrusive LIFO free list: the
//! hole stores the index of the next hole, and `first_hole` points at the
//! most recently freed slot.

use std::fmt;

/// Global logical index of a slot.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SlotIndex(pub u32);

impl SlotIndex {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SlotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Maps a logical index to `(segment, offset)`.
#[inline]
pub fn locate(i: SlotIndex) -> (usize, usize) {
    let n = i.0 as u64 + 1;
    let segment = 63 - n.leading_zeros() as usize;
    let offset = (n - (1u64 << segment)) as usize;
    (segment, offset)
}

#[derive(Clone, Debug)]
pub enum Slot<T> {
    Occupied(T),
    Hole(Option<SlotIndex>),
}

#[derive(Clone)]
pub struct BigArray<T> {
    // Each inner Vec is created with capacity 2^k and never pushed past it,
    // so its buffer is never reallocated.
    segments: Vec<Vec<Slot<T>>>,
    appended: u32,
    size: u32,
    first_hole: Option<SlotIndex>,
}

impl<T> Default for BigArray<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> BigArray<T> {
    pub const fn new() -> Self {
        BigArray {
            segments: Vec::new(),
            appended: 0,
            size: 0,
            first_hole: None,
        }
    }

    /// Number of occupied slots.
    #[inline]
    pub fn len(&self) -> usize {
        self.size as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Number of slots ever appended (occupied plus holes).
    #[inline]
    pub fn appended(&self) -> usize {
        self.appended as usize
    }

    /// Total slots across all allocated segments.
    pub fn capacity(&self) -> usize {
        (1usize << self.segments.len()) - 1
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn first_hole(&self) -> Option<SlotIndex> {
        self.first_hole
    }

    /// Walks the hole chain from `first_hole`.
    pub fn holes(&self) -> HoleChain<'_, T> {
        HoleChain {
            array: self,
            next: self.first_hole,
            remaining: self.appended as usize - self.size as usize,
        }
    }

    pub fn alloc(&mut self, value: T) -> SlotIndex {
        if let Some(hole) = self.first_hole {
            let slot = self.slot_mut(hole);
            let next = match slot {
                Slot::Hole(next) => *next,
                Slot::Occupied(_) => panic!("BigArray: hole chain points at occupied slot {hole}"),
            };
            *slot = Slot::Occupied(value);
            self.first_hole = next;
            self.size += 1;
            return hole;
        }
        let index = SlotIndex(self.appended);
        let (segment, _) = locate(index);
        if segment == self.segments.len() {
            self.segments.push(Vec::with_capacity(1usize << segment));
        }
        let seg = &mut self.segments[segment];
        debug_assert!(seg.len() < seg.capacity());
        seg.push(Slot::Occupied(value));
        self.appended = self
            .appended
            .checked_add(1)
            .expect("BigArray: index space exhausted");
        self.size += 1;
        index
    }

    /// Frees an occupied slot and returns its payload.
    ///
    /// Panics if `i` is out of range or already a hole.
    pub fn free(&mut self, i: SlotIndex) -> T {
        let first_hole = self.first_hole;
        let slot = self.slot_mut(i);
        let old = std::mem::replace(slot, Slot::Hole(first_hole));
        match old {
            Slot::Occupied(value) => {
                self.first_hole = Some(i);
                self.size -= 1;
                value
            }
            Slot::Hole(_) => {
                *slot = old;
                panic!("BigArray: double free of slot {i}");
            }
        }
    }

    #[inline]
    pub fn try_get(&self, i: SlotIndex) -> Option<&T> {
        if i.0 >= self.appended {
            return None;
        }
        let (segment, offset) = locate(i);
        match &self.segments[segment][offset] {
            Slot::Occupied(v) => Some(v),
            Slot::Hole(_) => None,
        }
    }

    #[inline]
    pub fn try_get_mut(&mut self, i: SlotIndex) -> Option<&mut T> {
        if i.0 >= self.appended {
            return None;
        }
        let (segment, offset) = locate(i);
        match &mut self.segments[segment][offset] {
            Slot::Occupied(v) => Some(v),
            Slot::Hole(_) => None,
        }
    }

    #[inline]
    #[track_caller]
    pub fn get(&self, i: SlotIndex) -> &T {
        match self.try_get(i) {
            Some(v) => v,
            None => panic!("BigArray: access to vacant slot {i}"),
        }
    }

    #[inline]
    #[track_caller]
    pub fn get_mut(&mut self, i: SlotIndex) -> &mut T {
        match self.try_get_mut(i) {
            Some(v) => v,
            None => panic!("BigArray: access to vacant slot {i}"),
        }
    }

    pub fn is_occupied(&self, i: SlotIndex) -> bool {
        self.try_get(i).is_some()
    }

    /// Raw slot view, for invariant checks.
    pub fn slot(&self, i: SlotIndex) -> Option<&Slot<T>> {
        if i.0 >= self.appended {
            return None;
        }
        let (segment, offset) = locate(i);
        Some(&self.segments[segment][offset])
    }

    /// Address of the payload at `i`, used to check location stability.
    pub fn payload_addr(&self, i: SlotIndex) -> Option<*const T> {
        self.try_get(i).map(|v| v as *const T)
    }

    /// Visits occupied slots in index order. Cost is proportional to the
    /// number of appended slots, holes included.
    pub fn iter(&self) -> impl Iterator<Item = (SlotIndex, &T)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| s.iter())
            .enumerate()
            .filter_map(|(i, s)| match s {
                Slot::Occupied(v) => Some((SlotIndex(i as u32), v)),
                Slot::Hole(_) => None,
            })
    }

    #[track_caller]
    fn slot_mut(&mut self, i: SlotIndex) -> &mut Slot<T> {
        assert!(
            i.0 < self.appended,
            "BigArray: index {i} out of range (appended {})",
            self.appended
        );
        let (segment, offset) = locate(i);
        &mut self.segments[segment][offset]
    }
}

impl<T: fmt::Debug> fmt::Debug for BigArray<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BigArray")
            .field("size", &self.size)
            .field("appended", &self.appended)
            .field("segments", &self.segments.len())
            .field("first_hole", &self.first_hole)
            .finish()
    }
}

pub struct HoleChain<'a, T> {
    array: &'a BigArray<T>,
    next: Option<SlotIndex>,
    // bounds the walk so a corrupted (cyclic) chain cannot loop forever
    remaining: usize,
}

impl<T> Iterator for HoleChain<'_, T> {
    type Item = SlotIndex;

    fn next(&mut self) -> Option<SlotIndex> {
        let cur = self.next?;
        if self.remaining == 0 {
            panic!("BigArray: hole chain longer than hole count (cycle?)");
        }
        self.remaining -= 1;
        self.next = match self.array.slot(cur) {
            Some(Slot::Hole(next)) => *next,
            _ => panic!("BigArray: hole chain reaches non-hole slot {cur}"),
        };
        Some(cur)
    }
}
