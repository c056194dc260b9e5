//! A scenario resolved into concrete links: who serves whom, the DC gain of
//! every served link, the NOMA power split, receiver noise, and the link
//! segments a human can block.

use std::fmt;

use rayon::prelude::*;

use crate::channel::{ChannelModel, GainSplit, ReceiverSpec, TransmitterSpec};
use crate::error::{Error, Result};
use crate::geometry::{CylinderSpec, Point2, Point3, Segment3};
use crate::mobility::{blockage_probability, relay_path_blockage_probability, BlockageProbabilityTable, RwpDistribution};
use crate::noma::{noise_variance, order_users_and_allocate, ChannelGains, NomaAllocation, RelaySpec};
use crate::scenario::Scenario;

/// A node of the network, 0-based; displayed 1-based (`AP1`, `R1`, `U1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Ap(usize),
    Relay(usize),
    User(usize),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Ap(i) => write!(f, "AP{}", i + 1),
            NodeId::Relay(i) => write!(f, "R{}", i + 1),
            NodeId::User(i) => write!(f, "U{}", i + 1),
        }
    }
}

/// A line-of-sight hop, or a two-hop relayed path treated as one unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkId {
    Hop(NodeId, NodeId),
    RelayPath { ap: usize, relay: usize, user: usize },
}

impl LinkId {
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match *self {
            LinkId::Hop(a, b) => (a, b),
            LinkId::RelayPath { ap, user, .. } => (NodeId::Ap(ap), NodeId::User(user)),
        }
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkId::Hop(a, b) => write!(f, "{a}-{b}"),
            LinkId::RelayPath { ap, relay, user } => {
                write!(f, "{}-{}-{}", NodeId::Ap(*ap), NodeId::Relay(*relay), NodeId::User(*user))
            }
        }
    }
}

/// One relay terminal with its receive and transmit front ends.
#[derive(Clone, Debug)]
pub struct RelayNode {
    pub spec: RelaySpec<f64>,
    pub receiver: ReceiverSpec<f64>,
    /// Unsteered laser; aim it with [`TransmitterSpec::aimed_at`].
    pub transmitter: TransmitterSpec<f64>,
    /// Users this relay forwards to.
    pub serves: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Network {
    pub aps: Vec<TransmitterSpec<f64>>,
    pub relays: Vec<RelayNode>,
    pub users: Vec<ReceiverSpec<f64>>,
    /// Users served by each AP, ascending.
    pub ap_users: Vec<Vec<usize>>,
    /// APs serving each user, ascending.
    pub user_aps: Vec<Vec<usize>>,
    /// Relays serving each user, ascending.
    pub user_relays: Vec<Vec<usize>>,
    pub gains: ChannelGains<f64>,
    pub allocation: NomaAllocation<f64>,
    /// Noise variance of every user, from its nominal unblocked power.
    pub user_noise: Vec<f64>,
    pub cylinder: CylinderSpec<f64>,
    pub rwp: RwpDistribution<f64>,
    pub humans: usize,
    pub rel_tol: f64,
    ap_user_seg: Vec<Option<Segment3<f64>>>,
    ap_relay_seg: Vec<Option<Segment3<f64>>>,
    relay_user_seg: Vec<Option<Segment3<f64>>>,
}

/// Channel gain of one served link, split by path type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGain {
    pub tx: NodeId,
    pub rx: NodeId,
    pub split: GainSplit<f64>,
}

fn user_receiver(u: &crate::scenario::UserConfig) -> ReceiverSpec<f64> {
    ReceiverSpec {
        position: u.position,
        normal: ReceiverSpec::normal_from_angles(u.elevation_deg.to_radians(), u.azimuth_deg.to_radians()),
        area: u.area,
        fov: u.fov_deg.to_radians(),
        responsivity: u.responsivity,
    }
}

fn hop(a: Point3<f64>, b: Point3<f64>) -> Option<Segment3<f64>> {
    Segment3::new(a, b).ok()
}

impl Network {
    /// Resolves association, pairing and gains. Building the channel model
    /// tiles every room surface, so prefer [`Network::build_with`] when a
    /// model is already at hand.
    pub fn build(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let ch = &scenario.channel;
        let model = ChannelModel::new(scenario.room, ch.first_resolution, ch.second_resolution, ch.bin_duration)?;
        Self::build_with(scenario, &model)
    }

    pub fn build_with(scenario: &Scenario, model: &ChannelModel<f64>) -> Result<Self> {
        scenario.validate()?;
        let bounces = scenario.channel.max_bounces;
        let aps: Vec<TransmitterSpec<f64>> = scenario
            .aps
            .iter()
            .map(|a| TransmitterSpec {
                power: a.power,
                divergence: a.divergence,
                max_steering: a.max_steering_deg.to_radians(),
                ..TransmitterSpec::ceiling(a.position)
            })
            .collect();
        let users: Vec<ReceiverSpec<f64>> = scenario.users.iter().map(user_receiver).collect();
        let (n_ap, n_relay, n_user) = (aps.len(), scenario.relays.len(), users.len());

        // association: steering cone unless overridden per AP
        let mut ap_users: Vec<Vec<usize>> = aps
            .iter()
            .map(|ap| {
                (0..n_user)
                    .filter(|&u| {
                        crate::channel::steering_angle(ap.position, ap.boresight, users[u].position) <= ap.max_steering
                    })
                    .collect()
            })
            .collect();
        for o in &scenario.noma.association {
            let mut list: Vec<usize> = o.users.iter().map(|u| u - 1).collect();
            list.sort_unstable();
            list.dedup();
            ap_users[o.ap - 1] = list;
        }

        let mut relays = Vec::with_capacity(n_relay);
        for (r, cfg) in scenario.relays.iter().enumerate() {
            let paired = match cfg.paired_ap {
                Some(a) => a - 1,
                None => (0..n_ap)
                    .min_by(|&a, &b| {
                        let da = aps[a].position.distance(cfg.position);
                        let db = aps[b].position.distance(cfg.position);
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .ok_or_else(|| Error::UnpairedRelay(format!("R{}", r + 1)))?,
            };
            let boresight = scenario
                .wall_of(cfg.position)
                .ok_or_else(|| Error::validation(format!("relays[{r}].position"), "relay is not on a wall"))?;
            let transmitter = TransmitterSpec {
                position: cfg.position,
                power: cfg.output_power,
                divergence: cfg.divergence,
                aim: cfg.position + boresight,
                boresight,
                max_steering: cfg.max_steering_deg.to_radians(),
            };
            let normal = (aps[paired].position - cfg.position).normalized().unwrap_or(boresight);
            let receiver = ReceiverSpec {
                position: cfg.position,
                normal,
                area: cfg.area,
                fov: cfg.fov_deg.to_radians(),
                responsivity: cfg.responsivity,
            };
            let serves = match &cfg.serves {
                Some(list) => {
                    let mut v: Vec<usize> = list.iter().map(|u| u - 1).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
                None => ap_users[paired]
                    .iter()
                    .copied()
                    .filter(|&u| {
                        crate::channel::steering_angle(cfg.position, boresight, users[u].position)
                            <= transmitter.max_steering
                    })
                    .collect(),
            };
            relays.push(RelayNode {
                spec: RelaySpec {
                    position: cfg.position,
                    paired_ap: Some(paired),
                    output_power_cap: cfg.output_power,
                    noise: cfg.noise,
                    responsivity: cfg.responsivity,
                },
                receiver,
                transmitter,
                serves,
            });
        }

        let mut user_aps = vec![Vec::new(); n_user];
        for (a, list) in ap_users.iter().enumerate() {
            for &u in list {
                user_aps[u].push(a);
            }
        }
        let mut user_relays = vec![Vec::new(); n_user];
        for (r, node) in relays.iter().enumerate() {
            for &u in &node.serves {
                user_relays[u].push(r);
            }
        }

        // gains of every served link
        let mut jobs: Vec<(NodeId, NodeId)> = Vec::new();
        for (a, list) in ap_users.iter().enumerate() {
            jobs.extend(list.iter().map(|&u| (NodeId::Ap(a), NodeId::User(u))));
        }
        for (r, node) in relays.iter().enumerate() {
            jobs.push((NodeId::Ap(node.spec.paired_ap.unwrap_or(0)), NodeId::Relay(r)));
            jobs.extend(node.serves.iter().map(|&u| (NodeId::Relay(r), NodeId::User(u))));
        }
        let splits: Vec<GainSplit<f64>> = jobs
            .par_iter()
            .map(|&(tx, rx)| {
                let (t, rcv) = Self::endpoints(&aps, &relays, &users, tx, rx);
                model.gain_split(&t.aimed_at(rcv.position), &rcv, bounces)
            })
            .collect::<Result<_>>()?;
        let mut gains = ChannelGains::new(n_ap, n_relay, n_user);
        for (&(tx, rx), s) in jobs.iter().zip(&splits) {
            match (tx, rx) {
                (NodeId::Ap(a), NodeId::User(u)) => gains.set_ap_user(a, u, s.total()),
                (NodeId::Ap(a), NodeId::Relay(r)) => gains.set_ap_relay(a, r, s.total()),
                (NodeId::Relay(r), NodeId::User(u)) => gains.set_relay_user(r, u, s.total()),
                _ => unreachable!("only forward links are traced"),
            }
        }

        let mut groups = Vec::new();
        for (a, list) in ap_users.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let served = list
                .iter()
                .map(|&u| Ok((u, gains.ap_user(a, u)?)))
                .collect::<Result<Vec<_>>>()?;
            groups.push(order_users_and_allocate(a, aps[a].power, &served, scenario.noma.power_ratio)?);
        }
        let allocation = NomaAllocation { groups };

        let mut user_noise = Vec::with_capacity(n_user);
        for (u, rx) in users.iter().enumerate() {
            let mut p = 0.0;
            for &a in &user_aps[u] {
                p += aps[a].power * gains.ap_user(a, u)?;
            }
            user_noise.push(noise_variance(&scenario.noise, p, rx.responsivity));
        }

        let ap_user_seg = (0..n_ap * n_user)
            .map(|k| hop(aps[k / n_user].position, users[k % n_user].position))
            .collect();
        let ap_relay_seg = (0..n_ap * n_relay)
            .map(|k| hop(aps[k / n_relay].position, relays[k % n_relay].spec.position))
            .collect();
        let relay_user_seg = (0..n_relay * n_user)
            .map(|k| hop(relays[k / n_user].spec.position, users[k % n_user].position))
            .collect();

        let room = &scenario.room;
        Ok(Self {
            aps,
            relays,
            users,
            ap_users,
            user_aps,
            user_relays,
            gains,
            allocation,
            user_noise,
            cylinder: scenario.human.cylinder(),
            rwp: RwpDistribution::new(room.width, room.length)?.with_origin(Point2::new(0.0, 0.0)),
            humans: scenario.human.count,
            rel_tol: scenario.quadrature.rel_tol,
            ap_user_seg,
            ap_relay_seg,
            relay_user_seg,
        })
    }

    fn endpoints(
        aps: &[TransmitterSpec<f64>],
        relays: &[RelayNode],
        users: &[ReceiverSpec<f64>],
        tx: NodeId,
        rx: NodeId,
    ) -> (TransmitterSpec<f64>, ReceiverSpec<f64>) {
        let t = match tx {
            NodeId::Ap(a) => aps[a],
            NodeId::Relay(r) => relays[r].transmitter,
            NodeId::User(_) => unreachable!("users do not transmit"),
        };
        let r = match rx {
            NodeId::Relay(r) => relays[r].receiver,
            NodeId::User(u) => users[u],
            NodeId::Ap(_) => unreachable!("access points do not receive"),
        };
        (t, r)
    }

    pub fn n_ap(&self) -> usize {
        self.aps.len()
    }

    pub fn n_relay(&self) -> usize {
        self.relays.len()
    }

    pub fn n_user(&self) -> usize {
        self.users.len()
    }

    pub fn paired_ap(&self, relay: usize) -> usize {
        self.relays[relay].spec.paired_ap.expect("relays are paired when the network is built")
    }

    pub fn relay_specs(&self) -> Vec<RelaySpec<f64>> {
        self.relays.iter().map(|r| r.spec).collect()
    }

    /// Line-of-sight segment between two nodes, `None` if they coincide.
    pub fn segment(&self, tx: NodeId, rx: NodeId) -> Option<Segment3<f64>> {
        let (na, nr, nu) = (self.n_ap(), self.n_relay(), self.n_user());
        match (tx, rx) {
            (NodeId::Ap(a), NodeId::User(u)) if a < na && u < nu => self.ap_user_seg[a * nu + u],
            (NodeId::Ap(a), NodeId::Relay(r)) if a < na && r < nr => self.ap_relay_seg[a * nr + r],
            (NodeId::Relay(r), NodeId::User(u)) if r < nr && u < nu => self.relay_user_seg[r * nu + u],
            _ => None,
        }
    }

    /// Every AP-user, AP-relay and relay-user hop, served or not.
    pub fn all_hops(&self) -> Vec<(LinkId, Segment3<f64>)> {
        let mut out = Vec::new();
        for a in 0..self.n_ap() {
            for u in 0..self.n_user() {
                out.extend(self.hop_entry(NodeId::Ap(a), NodeId::User(u)));
            }
        }
        for a in 0..self.n_ap() {
            for r in 0..self.n_relay() {
                out.extend(self.hop_entry(NodeId::Ap(a), NodeId::Relay(r)));
            }
        }
        for r in 0..self.n_relay() {
            for u in 0..self.n_user() {
                out.extend(self.hop_entry(NodeId::Relay(r), NodeId::User(u)));
            }
        }
        out
    }

    fn hop_entry(&self, tx: NodeId, rx: NodeId) -> Option<(LinkId, Segment3<f64>)> {
        self.segment(tx, rx).map(|s| (LinkId::Hop(tx, rx), s))
    }

    /// Relayed paths in use: paired AP, relay, served user.
    pub fn relay_paths(&self) -> Vec<LinkId> {
        let mut out = Vec::new();
        for (r, node) in self.relays.iter().enumerate() {
            for &u in &node.serves {
                out.push(LinkId::RelayPath {
                    ap: self.paired_ap(r),
                    relay: r,
                    user: u,
                });
            }
        }
        out
    }

    /// Gains of every served link, in build order.
    pub fn link_gains(&self, model: &ChannelModel<f64>, max_bounces: u8) -> Result<Vec<LinkGain>> {
        let mut jobs = Vec::new();
        for (a, list) in self.ap_users.iter().enumerate() {
            jobs.extend(list.iter().map(|&u| (NodeId::Ap(a), NodeId::User(u))));
        }
        for (r, node) in self.relays.iter().enumerate() {
            jobs.push((NodeId::Ap(self.paired_ap(r)), NodeId::Relay(r)));
            jobs.extend(node.serves.iter().map(|&u| (NodeId::Relay(r), NodeId::User(u))));
        }
        jobs.par_iter()
            .map(|&(tx, rx)| {
                let (t, r) = self.transceivers(tx, rx)?;
                Ok(LinkGain {
                    tx,
                    rx,
                    split: model.gain_split(&t, &r, max_bounces)?,
                })
            })
            .collect()
    }

    /// Transmitter aimed at the receiver, and the receiver, of one hop.
    pub fn transceivers(&self, tx: NodeId, rx: NodeId) -> Result<(TransmitterSpec<f64>, ReceiverSpec<f64>)> {
        let valid = match (tx, rx) {
            (NodeId::Ap(a), NodeId::User(u)) => a < self.n_ap() && u < self.n_user(),
            (NodeId::Ap(a), NodeId::Relay(r)) => a < self.n_ap() && r < self.n_relay(),
            (NodeId::Relay(r), NodeId::User(u)) => r < self.n_relay() && u < self.n_user(),
            _ => false,
        };
        if !valid {
            return Err(Error::InvalidArgument(format!("no link {tx} -> {rx}")));
        }
        let (t, r) = Self::endpoints(&self.aps, &self.relays, &self.users, tx, rx);
        Ok((t.aimed_at(r.position), r))
    }

    /// Blockage probability of every hop and every relayed path in use.
    pub fn blockage_table(&self) -> Result<BlockageProbabilityTable<f64>> {
        let mut jobs: Vec<(LinkId, Segment3<f64>, Option<Segment3<f64>>)> =
            self.all_hops().into_iter().map(|(id, s)| (id, s, None)).collect();
        for id in self.relay_paths() {
            if let LinkId::RelayPath { ap, relay, user } = id {
                let first = self.segment(NodeId::Ap(ap), NodeId::Relay(relay));
                let second = self.segment(NodeId::Relay(relay), NodeId::User(user));
                if let (Some(a), Some(b)) = (first, second) {
                    jobs.push((id, a, Some(b)));
                }
            }
        }
        let probs: Vec<f64> = jobs
            .par_iter()
            .map(|(_, a, b)| match b {
                None => blockage_probability(a, &self.cylinder, &self.rwp, self.rel_tol),
                Some(b) => relay_path_blockage_probability(a, b, &self.cylinder, &self.rwp, self.rel_tol),
            })
            .collect::<Result<_>>()?;
        let mut table = BlockageProbabilityTable::new(self.rel_tol, self.cylinder);
        for ((id, _, _), p) in jobs.iter().zip(probs) {
            table.insert(*id, p);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn net() -> &'static Network {
        static NET: OnceLock<Network> = OnceLock::new();
        NET.get_or_init(|| Network::build(&default_scenario()).unwrap())
    }

    #[test]
    fn ids_display_one_based() {
        assert_eq!(LinkId::Hop(NodeId::Ap(0), NodeId::User(4)).to_string(), "AP1-U5");
        assert_eq!(LinkId::RelayPath { ap: 1, relay: 1, user: 4 }.to_string(), "AP2-R2-U5");
    }

    #[test]
    fn default_association() {
        let n = net();
        let counts: Vec<usize> = n.user_aps.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 2, 1, 2, 4, 2]);
        assert_eq!(n.user_aps[4], vec![1, 2, 5, 6]);
        let relay_counts: Vec<usize> = n.user_relays.iter().map(Vec::len).collect();
        assert_eq!(relay_counts, vec![1, 2, 1, 2, 4, 2]);
    }

    #[test]
    fn relays_pair_with_nearest_ap() {
        let n = net();
        let paired: Vec<usize> = (0..8).map(|r| n.paired_ap(r)).collect();
        assert_eq!(paired, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn vertical_link_gain_is_one() {
        let n = net();
        assert_eq!(n.gains.ap_user(0, 0).unwrap(), 1.0);
        // 1 m offset at 2 m drop: full capture, cosine of incidence
        assert_relative_eq!(n.gains.ap_user(0, 3).unwrap(), 2.0 / 5f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn allocation_conserves_budget() {
        for g in &net().allocation.groups {
            let total: f64 = g.power.iter().sum();
            assert_relative_eq!(total, 1e-3, max_relative = 1e-12);
        }
    }

    #[test]
    fn link_inventory() {
        let n = net();
        let hops = n.all_hops();
        let count = |f: fn(&LinkId) -> bool| hops.iter().filter(|(id, _)| f(id)).count();
        assert_eq!(count(|id| matches!(id, LinkId::Hop(NodeId::Ap(_), NodeId::User(_)))), 48);
        assert_eq!(count(|id| matches!(id, LinkId::Hop(NodeId::Ap(_), NodeId::Relay(_)))), 64);
        assert_eq!(count(|id| matches!(id, LinkId::Hop(NodeId::Relay(_), NodeId::User(_)))), 48);
        assert_eq!(n.relay_paths().len(), 12);
    }

    #[test]
    fn unservable_override_is_an_error() {
        let mut s = default_scenario();
        s.noma.association.push(crate::scenario::AssociationOverride { ap: 1, users: vec![3] });
        assert!(matches!(Network::build(&s), Err(Error::UnservableLink { .. })));
    }
}
