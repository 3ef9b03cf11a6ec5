//! Parsing a 10M-entry Matrix Market stream stays within a fixed heap budget.

use std::alloc::{GlobalAlloc, Layout, System};
use std::io::{BufReader, Read};
use std::sync::atomic::{AtomicUsize, Ordering};

use rooflens::mtx::parse_stats;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
        PEAK.fetch_max(live, Ordering::Relaxed);
        System.alloc(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
        System.dealloc(ptr, layout)
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

/// Emits a general coordinate file with `entries` lines on demand.
struct Generated {
    n: u64,
    entries: u64,
    next: u64,
    line: [u8; 128],
    len: usize,
    pos: usize,
}

impl Generated {
    fn new(n: u64, entries: u64) -> Self {
        let mut g = Self {
            n,
            entries,
            next: 0,
            line: [0; 128],
            len: 0,
            pos: 0,
        };
        g.fill_header();
        g
    }

    fn put(&mut self, text: std::fmt::Arguments<'_>) {
        use std::io::Write;
        let mut cursor = std::io::Cursor::new(&mut self.line[..]);
        cursor.write_fmt(text).expect("line fits");
        self.len = cursor.position() as usize;
        self.pos = 0;
    }

    fn fill_header(&mut self) {
        let (n, entries) = (self.n, self.entries);
        self.put(format_args!(
            "%%MatrixMarket matrix coordinate real general\n{n} {n} {entries}\n"
        ));
    }
}

impl Read for Generated {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        if self.pos == self.len {
            if self.next == self.entries {
                return Ok(0);
            }
            let k = self.next;
            self.next += 1;
            let (r, c) = (k % self.n + 1, (k * 7919) % self.n + 1);
            self.put(format_args!("{r} {c} 0.5\n"));
        }
        let n = buf.len().min(self.len - self.pos);
        buf[..n].copy_from_slice(&self.line[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

#[test]
fn ten_million_entries_under_fixed_budget() {
    const ENTRIES: u64 = 10_000_000;
    const BUDGET: usize = 256 * 1024;

    let reader = BufReader::with_capacity(1 << 16, Generated::new(1_000_000, ENTRIES));
    let baseline = LIVE.load(Ordering::Relaxed);
    PEAK.store(baseline, Ordering::Relaxed);
    let stats = parse_stats(reader).unwrap();
    let growth = PEAK.load(Ordering::Relaxed) - baseline;

    assert_eq!(
        (stats.rows(), stats.cols(), stats.nnz()),
        (1_000_000, 1_000_000, ENTRIES)
    );
    assert!(
        growth < BUDGET,
        "peak heap growth {growth} B exceeds {BUDGET} B"
    );
}
