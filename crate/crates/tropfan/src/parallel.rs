//! Multi-threaded enumeration with output identical to the sequential search.
//!
//! The search tree is cut at a shallow depth; prefixes are dealt to workers and the canonical
//! labelings are concatenated back in prefix order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use tropfan_core::activation::{ActivationPattern, Enumerator};
use tropfan_core::Result;

const SPLIT_DEPTH: usize = 3;

/// Canonical maximal labelings, in the order the sequential search produces them.
pub fn canonical_labelings(en: &Enumerator<'_>, workers: usize) -> Result<Vec<Vec<usize>>> {
    if workers <= 1 {
        return en.complete_from(&[]);
    }
    let prefixes = en.frontier(SPLIT_DEPTH)?;
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<Vec<Vec<usize>>>>> = Vec::new();
    slots.resize_with(prefixes.len(), || None);
    let results: Vec<Vec<(usize, Result<Vec<Vec<usize>>>)>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers.min(prefixes.len().max(1)))
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let idx = next.fetch_add(1, Ordering::Relaxed);
                        let Some(prefix) = prefixes.get(idx) else { break };
                        done.push((idx, en.complete_from(prefix)));
                    }
                    done
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    for (idx, r) in results.into_iter().flatten() {
        slots[idx] = Some(r);
    }
    let mut out = Vec::new();
    for slot in slots {
        out.extend(slot.expect("every prefix processed")?);
    }
    Ok(out)
}

/// All maximal patterns, sorted.
pub fn maximal_patterns(en: &Enumerator<'_>, workers: usize) -> Result<Vec<ActivationPattern>> {
    Ok(en.finish(canonical_labelings(en, workers)?))
}
