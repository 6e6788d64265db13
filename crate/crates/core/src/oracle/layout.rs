//! Packing of consecutive batches into UDP-Lite packets, built directly from
//! packet indices so the oracles do not share code with the analytical model.

/// One contiguous run of a batch's packets inside a single UDP-Lite packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub udp: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodLayout {
    pub batch_size: usize,
    pub aggregation: usize,
    pub packets: usize,
    pub udp_packets: usize,
    /// `batches[b]` lists the pieces of batch `b` in sending order.
    pub batches: Vec<Vec<Piece>>,
}

impl PeriodLayout {
    pub fn new(m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1);
        let packets = (1..=m * n)
            .find(|p| p % m == 0 && p % n == 0)
            .unwrap_or(m * n);
        let mut batches: Vec<Vec<Piece>> = vec![Vec::new(); packets / m];
        for packet in 0..packets {
            let udp = packet / n;
            let pieces = &mut batches[packet / m];
            match pieces.last_mut() {
                Some(p) if p.udp == udp => p.len += 1,
                _ => pieces.push(Piece { udp, len: 1 }),
            }
        }
        PeriodLayout {
            batch_size: m,
            aggregation: n,
            packets,
            udp_packets: packets / n,
            batches,
        }
    }

    /// Packets of the batch that opens each UDP-Lite packet, i.e. the
    /// phase `ℓ` of every UDP-Lite packet in sending order.
    pub fn phase_lengths(&self) -> Vec<usize> {
        let mut out = vec![0; self.udp_packets];
        let mut seen = vec![false; self.udp_packets];
        for pieces in &self.batches {
            for p in pieces {
                if !seen[p.udp] {
                    seen[p.udp] = true;
                    out[p.udp] = p.len;
                }
            }
        }
        out
    }
}
