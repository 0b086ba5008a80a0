//! Problem instances: packets, per-user requests and side-information matrices.
//!
//! Bits are laid out packet-major: bit `f` of packet `p` has global index
//! `p * packet_bits + f`.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::gf2::Gf2Matrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("num_packets must be at least 1")]
    NoPackets,
    #[error("packet_bits must be at least 1")]
    NoPacketBits,
    #[error("at least one user is required")]
    NoUsers,
    #[error("user {user}: request set is empty")]
    EmptyRequests { user: usize },
    #[error("user {user}: requests[{position}] = {packet} is out of range for {num_packets} packets")]
    RequestOutOfRange {
        user: usize,
        position: usize,
        packet: usize,
        num_packets: usize,
    },
    #[error("user {user}: packet {packet} is requested twice")]
    DuplicateRequest { user: usize, packet: usize },
    #[error("user {user}: side_info has {found} columns, expected {expected}")]
    SideInfoWidth {
        user: usize,
        expected: usize,
        found: usize,
    },
    #[error("packet index {packet} at position {position} is out of range for {num_packets} packets")]
    PacketOutOfRange {
        position: usize,
        packet: usize,
        num_packets: usize,
    },
    #[error("packet {packet} listed twice")]
    DuplicatePacket { packet: usize },
    #[error("xor term {term} is empty")]
    EmptyTerm { term: usize },
    #[error("xor term {term}: bit {bit} is out of range for {packet_bits}-bit packets")]
    BitOutOfRange {
        term: usize,
        bit: usize,
        packet_bits: usize,
    },
}

/// One receiver: the packets it wants and the matrix generating its cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSpec {
    requests: Vec<usize>,
    side_info: Gf2Matrix,
}

impl UserSpec {
    /// Requests are stored in ascending order.
    pub fn new(mut requests: Vec<usize>, side_info: Gf2Matrix) -> Self {
        requests.sort_unstable();
        Self {
            requests,
            side_info,
        }
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn side_info(&self) -> &Gf2Matrix {
        &self.side_info
    }

    /// Bits of side information held, `M_k·F`.
    pub fn cache_bits(&self) -> usize {
        self.side_info.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    num_packets: usize,
    packet_bits: usize,
    users: Vec<UserSpec>,
}

impl ProblemInstance {
    pub fn new(
        num_packets: usize,
        packet_bits: usize,
        users: Vec<UserSpec>,
    ) -> Result<Self, InstanceError> {
        if num_packets == 0 {
            return Err(InstanceError::NoPackets);
        }
        if packet_bits == 0 {
            return Err(InstanceError::NoPacketBits);
        }
        if users.is_empty() {
            return Err(InstanceError::NoUsers);
        }
        let width = num_packets * packet_bits;
        for (k, u) in users.iter().enumerate() {
            if u.requests.is_empty() {
                return Err(InstanceError::EmptyRequests { user: k });
            }
            for (i, &t) in u.requests.iter().enumerate() {
                if t >= num_packets {
                    return Err(InstanceError::RequestOutOfRange {
                        user: k,
                        position: i,
                        packet: t,
                        num_packets,
                    });
                }
            }
            if let Some(w) = u.requests.windows(2).find(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateRequest {
                    user: k,
                    packet: w[0],
                });
            }
            if u.side_info.cols() != width {
                return Err(InstanceError::SideInfoWidth {
                    user: k,
                    expected: width,
                    found: u.side_info.cols(),
                });
            }
        }
        Ok(Self {
            num_packets,
            packet_bits,
            users,
        })
    }

    pub fn num_packets(&self) -> usize {
        self.num_packets
    }

    pub fn packet_bits(&self) -> usize {
        self.packet_bits
    }

    /// Length of the stacked packet vector, `N·F`.
    pub fn total_bits(&self) -> usize {
        self.num_packets * self.packet_bits
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[UserSpec] {
        &self.users
    }

    pub fn user(&self, k: usize) -> &UserSpec {
        &self.users[k]
    }

    /// Rows contributed by user `k` to the objective, `|T_k|·F`.
    pub fn request_rows(&self, k: usize) -> usize {
        self.users[k].requests.len() * self.packet_bits
    }

    /// `Σ_k |T_k|·F`.
    pub fn total_request_rows(&self) -> usize {
        (0..self.users.len()).map(|k| self.request_rows(k)).sum()
    }

    pub fn request_matrix(&self, k: usize) -> RequestMatrix {
        build_request_matrix(self, k)
    }

    /// All `R_k` stacked in user order.
    pub fn stacked_requests(&self) -> Gf2Matrix {
        let blocks: Vec<RequestMatrix> = (0..self.users.len())
            .map(|k| self.request_matrix(k))
            .collect();
        let refs: Vec<&Gf2Matrix> = blocks.iter().map(|b| &b.0).collect();
        Gf2Matrix::vstack(self.total_bits(), &refs).expect("request blocks share width")
    }
}

/// The request matrix `R_k`: an `F × F` identity block for each requested
/// packet, placed in that packet's column block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestMatrix(Gf2Matrix);

impl RequestMatrix {
    pub fn into_inner(self) -> Gf2Matrix {
        self.0
    }
}

impl Deref for RequestMatrix {
    type Target = Gf2Matrix;

    fn deref(&self) -> &Gf2Matrix {
        &self.0
    }
}

pub fn build_request_matrix(instance: &ProblemInstance, user: usize) -> RequestMatrix {
    let f = instance.packet_bits;
    let requests = &instance.users[user].requests;
    let mut r = Gf2Matrix::zeros(requests.len() * f, instance.total_bits());
    for (i, &t) in requests.iter().enumerate() {
        for b in 0..f {
            r.set(i * f + b, t * f + b, true);
        }
    }
    RequestMatrix(r)
}

fn check_packets(num_packets: usize, packets: &[usize]) -> Result<(), InstanceError> {
    for (i, &p) in packets.iter().enumerate() {
        if p >= num_packets {
            return Err(InstanceError::PacketOutOfRange {
                position: i,
                packet: p,
                num_packets,
            });
        }
        if packets[..i].contains(&p) {
            return Err(InstanceError::DuplicatePacket { packet: p });
        }
    }
    Ok(())
}

/// Side information made of whole packets: one unit row per known bit.
pub fn side_info_uncoded(
    num_packets: usize,
    packet_bits: usize,
    packets: &[usize],
) -> Result<Gf2Matrix, InstanceError> {
    check_packets(num_packets, packets)?;
    let mut sorted = packets.to_vec();
    sorted.sort_unstable();
    let mut s = Gf2Matrix::zeros(sorted.len() * packet_bits, num_packets * packet_bits);
    for (i, &p) in sorted.iter().enumerate() {
        for b in 0..packet_bits {
            s.set(i * packet_bits + b, p * packet_bits + b, true);
        }
    }
    Ok(s)
}

/// One XOR of packets. Without `bit` the XOR is taken at every bit position,
/// giving `F` rows; with `bit` it yields the single row for that position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorTerm {
    pub packets: Vec<usize>,
    pub bit: Option<usize>,
}

impl XorTerm {
    pub fn all_bits(packets: Vec<usize>) -> Self {
        Self { packets, bit: None }
    }

    pub fn at_bit(packets: Vec<usize>, bit: usize) -> Self {
        Self {
            packets,
            bit: Some(bit),
        }
    }
}

/// Side information made of packet-level XORs.
pub fn side_info_xor(
    num_packets: usize,
    packet_bits: usize,
    terms: &[XorTerm],
) -> Result<Gf2Matrix, InstanceError> {
    let mut rows = 0;
    for (t, term) in terms.iter().enumerate() {
        if term.packets.is_empty() {
            return Err(InstanceError::EmptyTerm { term: t });
        }
        check_packets(num_packets, &term.packets)?;
        match term.bit {
            Some(bit) if bit >= packet_bits => {
                return Err(InstanceError::BitOutOfRange {
                    term: t,
                    bit,
                    packet_bits,
                })
            }
            Some(_) => rows += 1,
            None => rows += packet_bits,
        }
    }
    let mut s = Gf2Matrix::zeros(rows, num_packets * packet_bits);
    let mut r = 0;
    for term in terms {
        let bits = match term.bit {
            Some(b) => b..b + 1,
            None => 0..packet_bits,
        };
        for b in bits {
            for &p in &term.packets {
                s.set(r, p * packet_bits + b, true);
            }
            r += 1;
        }
    }
    Ok(s)
}
