//! Tree-structured URI gene.
//!
//! A URI phenotype is rebuilt from typed parts so that every constrained
//! leaf (ports, IPv4 octets, hostname labels) stays inside its bounds under
//! sampling and mutation, and the rendered string is always grammatically
//! valid.

use rand::Rng as _;

use crate::Rng;

pub const MEDIA_TYPES: &[&str] = &["text/plain", "application/json", "image/png"];
pub const URN_NIDS: &[&str] = &["isbn", "uuid", "example"];

const MAX_LABELS: usize = 3;
const MAX_LABEL_LEN: usize = 8;
const MAX_SEGMENTS: usize = 3;
const MAX_SEGMENT_LEN: usize = 6;
const MAX_PAYLOAD_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct UriGene {
    pub variant: UriVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UriVariant {
    Data {
        media: usize,
        base64: bool,
        payload: String,
    },
    Web {
        https: bool,
        host: HostGene,
        port: Option<u16>,
        path: Option<Vec<String>>,
    },
    Ftp {
        host: HostGene,
        path: Option<Vec<String>>,
    },
    File {
        path: Vec<String>,
    },
    Urn {
        nid: usize,
        nss: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HostGene {
    Name { labels: Vec<String> },
    Ipv4 { octets: [u8; 4] },
}

fn sample_label(rng: &mut Rng) -> String {
    let len = rng.random_range(1..=MAX_LABEL_LEN);
    let mut s = String::with_capacity(len);
    s.push((b'a' + rng.random_range(0..26u8)) as char);
    for _ in 1..len {
        s.push(sample_lower_alnum(rng));
    }
    s
}

fn sample_lower_alnum(rng: &mut Rng) -> char {
    let i = rng.random_range(0..36u8);
    if i < 26 {
        (b'a' + i) as char
    } else {
        (b'0' + (i - 26)) as char
    }
}

fn sample_segment(rng: &mut Rng) -> String {
    let len = rng.random_range(1..=MAX_SEGMENT_LEN);
    (0..len).map(|_| sample_lower_alnum(rng)).collect()
}

fn sample_path(rng: &mut Rng) -> Vec<String> {
    let n = rng.random_range(1..=MAX_SEGMENTS);
    (0..n).map(|_| sample_segment(rng)).collect()
}

impl HostGene {
    fn sample(rng: &mut Rng) -> HostGene {
        if rng.random_bool(0.5) {
            let n = rng.random_range(1..=MAX_LABELS);
            HostGene::Name {
                labels: (0..n).map(|_| sample_label(rng)).collect(),
            }
        } else {
            HostGene::Ipv4 {
                octets: [
                    rng.random_range(0..=255),
                    rng.random_range(0..=255),
                    rng.random_range(0..=255),
                    rng.random_range(0..=255),
                ],
            }
        }
    }

    fn mutate(&mut self, rng: &mut Rng) {
        if rng.random_bool(0.2) {
            // Flip host representation.
            *self = match self {
                HostGene::Name { .. } => HostGene::Ipv4 {
                    octets: [
                        rng.random_range(0..=255),
                        rng.random_range(0..=255),
                        rng.random_range(0..=255),
                        rng.random_range(0..=255),
                    ],
                },
                HostGene::Ipv4 { .. } => HostGene::Name {
                    labels: vec![sample_label(rng)],
                },
            };
            return;
        }
        match self {
            HostGene::Name { labels } => match rng.random_range(0..3) {
                0 if labels.len() < MAX_LABELS => labels.push(sample_label(rng)),
                1 if labels.len() > 1 => {
                    let i = rng.random_range(0..labels.len());
                    labels.remove(i);
                }
                _ => {
                    let i = rng.random_range(0..labels.len());
                    labels[i] = sample_label(rng);
                }
            },
            HostGene::Ipv4 { octets } => {
                let i = rng.random_range(0..4);
                octets[i] = octets[i].wrapping_add(rng.random_range(1..=255));
            }
        }
    }

    fn render(&self) -> String {
        match self {
            HostGene::Name { labels } => labels.join("."),
            HostGene::Ipv4 { octets } => {
                format!("{}.{}.{}.{}", octets[0], octets[1], octets[2], octets[3])
            }
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            HostGene::Name { labels } => {
                !labels.is_empty()
                    && labels.iter().all(|l| {
                        !l.is_empty()
                            && l.len() <= 63
                            && l.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
                    })
            }
            HostGene::Ipv4 { .. } => true,
        }
    }
}

impl UriGene {
    pub fn sample(rng: &mut Rng) -> UriGene {
        let variant = match rng.random_range(0..5) {
            0 => UriVariant::Data {
                media: rng.random_range(0..MEDIA_TYPES.len()),
                base64: rng.random_bool(0.5),
                payload: (0..rng.random_range(0..=MAX_PAYLOAD_LEN))
                    .map(|_| sample_lower_alnum(rng))
                    .collect(),
            },
            1 => UriVariant::Web {
                https: rng.random_bool(0.5),
                host: HostGene::sample(rng),
                port: if rng.random_bool(0.5) {
                    Some(rng.random_range(0..=65535))
                } else {
                    None
                },
                path: if rng.random_bool(0.5) {
                    Some(sample_path(rng))
                } else {
                    None
                },
            },
            2 => UriVariant::Ftp {
                host: HostGene::sample(rng),
                path: if rng.random_bool(0.5) {
                    Some(sample_path(rng))
                } else {
                    None
                },
            },
            3 => UriVariant::File {
                path: sample_path(rng),
            },
            _ => UriVariant::Urn {
                nid: rng.random_range(0..URN_NIDS.len()),
                nss: {
                    let len = rng.random_range(1..=MAX_SEGMENT_LEN);
                    (0..len).map(|_| sample_lower_alnum(rng)).collect()
                },
            },
        };
        UriGene { variant }
    }

    pub fn mutate(&mut self, rng: &mut Rng) {
        if rng.random_bool(0.15) {
            // Switch scheme family entirely.
            let old = self.clone();
            loop {
                *self = UriGene::sample(rng);
                if std::mem::discriminant(&self.variant) != std::mem::discriminant(&old.variant) {
                    return;
                }
            }
        }
        match &mut self.variant {
            UriVariant::Data {
                media,
                base64,
                payload,
            } => match rng.random_range(0..3) {
                0 => *media = (*media + 1 + rng.random_range(0..MEDIA_TYPES.len() - 1)) % MEDIA_TYPES.len(),
                1 => *base64 = !*base64,
                _ => {
                    if payload.is_empty() || rng.random_bool(0.5) {
                        if payload.len() < MAX_PAYLOAD_LEN {
                            payload.push(sample_lower_alnum(rng));
                        } else {
                            payload.pop();
                        }
                    } else {
                        payload.pop();
                    }
                }
            },
            UriVariant::Web {
                https,
                host,
                port,
                path,
            } => match rng.random_range(0..4) {
                0 => *https = !*https,
                1 => host.mutate(rng),
                2 => {
                    *port = match *port {
                        None => Some(rng.random_range(0..=65535)),
                        Some(p) => {
                            if rng.random_bool(0.3) {
                                None
                            } else {
                                Some(p.wrapping_add(rng.random_range(1..=u16::MAX)))
                            }
                        }
                    }
                }
                _ => mutate_opt_path(path, rng),
            },
            UriVariant::Ftp { host, path } => {
                if rng.random_bool(0.5) {
                    host.mutate(rng);
                } else {
                    mutate_opt_path(path, rng);
                }
            }
            UriVariant::File { path } => mutate_segments(path, rng, 1),
            UriVariant::Urn { nid, nss } => {
                if rng.random_bool(0.4) {
                    *nid = (*nid + 1 + rng.random_range(0..URN_NIDS.len() - 1)) % URN_NIDS.len();
                } else if nss.len() > 1 && rng.random_bool(0.5) {
                    nss.pop();
                } else {
                    nss.push(sample_lower_alnum(rng));
                }
            }
        }
    }

    pub fn render(&self) -> String {
        match &self.variant {
            UriVariant::Data {
                media,
                base64,
                payload,
            } => {
                let b64 = if *base64 { ";base64" } else { "" };
                format!("data:{}{},{}", MEDIA_TYPES[*media], b64, payload)
            }
            UriVariant::Web {
                https,
                host,
                port,
                path,
            } => {
                let scheme = if *https { "https" } else { "http" };
                let mut s = format!("{}://{}", scheme, host.render());
                if let Some(p) = port {
                    s.push_str(&format!(":{p}"));
                }
                if let Some(segments) = path {
                    for seg in segments {
                        s.push('/');
                        s.push_str(seg);
                    }
                }
                s
            }
            UriVariant::Ftp { host, path } => {
                let mut s = format!("ftp://{}", host.render());
                if let Some(segments) = path {
                    for seg in segments {
                        s.push('/');
                        s.push_str(seg);
                    }
                }
                s
            }
            UriVariant::File { path } => {
                let mut s = String::from("file://");
                for seg in path {
                    s.push('/');
                    s.push_str(seg);
                }
                s
            }
            UriVariant::Urn { nid, nss } => format!("urn:{}:{}", URN_NIDS[*nid], nss),
        }
    }

    /// True when the URI scheme is http/https, i.e. also a valid URL for the
    /// `UrlFormat` specialization.
    pub fn is_web(&self) -> bool {
        matches!(self.variant, UriVariant::Web { .. })
    }

    /// Samples a gene restricted to the http/https subtree.
    pub fn sample_web(rng: &mut Rng) -> UriGene {
        loop {
            let g = UriGene::sample(rng);
            if g.is_web() {
                return g;
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        match &self.variant {
            UriVariant::Data { media, payload, .. } => {
                *media < MEDIA_TYPES.len()
                    && payload
                        .bytes()
                        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
            }
            UriVariant::Web { host, path, .. } => {
                host.is_valid() && path.as_ref().map(|p| segments_valid(p)).unwrap_or(true)
            }
            UriVariant::Ftp { host, path } => {
                host.is_valid() && path.as_ref().map(|p| segments_valid(p)).unwrap_or(true)
            }
            UriVariant::File { path } => segments_valid(path),
            UriVariant::Urn { nid, nss } => {
                *nid < URN_NIDS.len()
                    && !nss.is_empty()
                    && nss
                        .bytes()
                        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
            }
        }
    }
}

fn segments_valid(segments: &[String]) -> bool {
    segments.iter().all(|s| {
        !s.is_empty()
            && s.bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
    })
}

fn mutate_opt_path(path: &mut Option<Vec<String>>, rng: &mut Rng) {
    match path {
        None => *path = Some(sample_path(rng)),
        Some(segments) => {
            if rng.random_bool(0.2) {
                *path = None;
            } else {
                mutate_segments(segments, rng, 0);
            }
        }
    }
}

fn mutate_segments(segments: &mut Vec<String>, rng: &mut Rng, min_len: usize) {
    match rng.random_range(0..3) {
        0 if segments.len() < MAX_SEGMENTS => segments.push(sample_segment(rng)),
        1 if segments.len() > min_len => {
            let i = rng.random_range(0..segments.len());
            segments.remove(i);
        }
        _ => {
            if segments.is_empty() {
                segments.push(sample_segment(rng));
            } else {
                let i = rng.random_range(0..segments.len());
                segments[i] = sample_segment(rng);
            }
        }
    }
}
