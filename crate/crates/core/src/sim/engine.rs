//! The single-threaded discrete-event loop.
//!
//! A priority queue keyed by (time, tick) drives the run; the tick is a
//! monotone counter, so simultaneous events fire in scheduling order and the
//! whole run is a pure function of the scenario.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use super::config::{Action, NodeConfig, Scenario, ScheduleItem, ValidationError};
use super::event::{EventKind, SimulationTrace, TraceEvent, TrustMatrixEntry};
use super::rng::{node_rng, unit_f64};
use crate::confidence::{control_value, ConfidenceResult};
use crate::opinion::{NodeId, OpinionTable};
use crate::score::{InteractionInputs, InteractionScore, RelevanceGrade};
use crate::trust::{assess_trust, OpinionReport};
use crate::{HOURS_PER_MONTH, HOURS_PER_YEAR};

/// Errors from read-only queries against a running simulation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QueryError {
    /// Snapshots can only look at the present or the past.
    #[error("snapshot at {requested}h requested, but the simulation is at {now}h")]
    FutureTime { requested: f64, now: f64 },
}

#[derive(Debug, Clone)]
enum Pending {
    External(usize),
    ResponseArrival { request: u64, grade: RelevanceGrade },
    RequestTimeout { request: u64 },
    OpinionArrival { query: u64, reporter: NodeId },
    QueryClose { query: u64 },
}

#[derive(Debug)]
struct QueueItem {
    time: f64,
    tick: u64,
    pending: Pending,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.tick.cmp(&other.tick))
    }
}

#[derive(Debug, Clone)]
struct RequestState {
    requester: NodeId,
    responder: NodeId,
    sent_at: f64,
    retries_left: u32,
}

#[derive(Debug, Clone)]
struct QueryState {
    trustor: NodeId,
    subject: NodeId,
    wants_disclosure: bool,
    started_at: f64,
    reports: Vec<(NodeId, f64)>,
}

/// A community simulation that can be stepped and inspected.
#[derive(Debug)]
pub struct Simulation {
    configs: BTreeMap<NodeId, NodeConfig>,
    rngs: BTreeMap<NodeId, ChaCha12Rng>,
    tables: BTreeMap<NodeId, OpinionTable>,
    schedule: Vec<ScheduleItem>,
    queue: BinaryHeap<Reverse<QueueItem>>,
    horizon: f64,
    score_opinion_responses: bool,
    now: f64,
    next_request: u64,
    next_query: u64,
    next_tick: u64,
    next_seq: u64,
    events: Vec<TraceEvent>,
    requests: BTreeMap<u64, RequestState>,
    queries: BTreeMap<u64, QueryState>,
}

impl Simulation {
    /// Validate the scenario and stage its schedule. No event runs yet.
    pub fn new(scenario: Scenario) -> Result<Self, ValidationError> {
        scenario.validate()?;
        let Scenario {
            nodes,
            schedule,
            horizon_hours,
            seed,
            score_opinion_responses,
        } = scenario;

        let mut configs = BTreeMap::new();
        let mut rngs = BTreeMap::new();
        let mut tables = BTreeMap::new();
        for node in nodes {
            rngs.insert(node.id.clone(), node_rng(seed, &node.id));
            tables.insert(node.id.clone(), OpinionTable::new(node.id.clone()));
            configs.insert(node.id.clone(), node);
        }

        let mut sim = Self {
            configs,
            rngs,
            tables,
            schedule,
            queue: BinaryHeap::new(),
            horizon: horizon_hours,
            score_opinion_responses,
            now: 0.0,
            next_request: 0,
            next_query: 0,
            next_tick: 0,
            next_seq: 0,
            events: Vec::new(),
            requests: BTreeMap::new(),
            queries: BTreeMap::new(),
        };
        for index in 0..sim.schedule.len() {
            let time = sim.schedule[index].time;
            sim.schedule_at(time, Pending::External(index));
        }
        Ok(sim)
    }

    /// Current simulation time in hours.
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Events emitted so far.
    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Current opinion table of `node`, if it exists.
    pub fn table(&self, node: &NodeId) -> Option<&OpinionTable> {
        self.tables.get(node)
    }

    /// Process everything scheduled up to `time` (clamped to the horizon).
    pub fn advance_to(&mut self, time: f64) {
        let limit = time.min(self.horizon);
        while let Some(Reverse(head)) = self.queue.peek() {
            if head.time > limit {
                break;
            }
            let Reverse(item) = self.queue.pop().expect("peeked");
            self.now = self.now.max(item.time);
            self.process(item);
        }
        self.now = self.now.max(limit);
    }

    /// Run to the horizon and package the results.
    pub fn finish(mut self) -> SimulationTrace {
        self.advance_to(self.horizon);
        let trust_matrix = self
            .snapshot_trust_matrix(self.horizon)
            .expect("simulation advanced to horizon");
        SimulationTrace {
            events: self.events,
            final_tables: self.tables,
            trust_matrix,
        }
    }

    /// The trust assessment and disclosure decision every node would reach
    /// about every other node at this instant, from its ledger and an
    /// idealized instantaneous opinion round in which every third node
    /// reports its current opinion.
    ///
    /// Read-only: consumes no randomness and changes no ledger.
    pub fn snapshot_trust_matrix(&self, time: f64) -> Result<Vec<TrustMatrixEntry>, QueryError> {
        if time > self.now {
            return Err(QueryError::FutureTime {
                requested: time,
                now: self.now,
            });
        }
        let mut matrix = Vec::new();
        for (trustor, cfg) in &self.configs {
            let table = &self.tables[trustor];
            for trustee in self.configs.keys() {
                if trustee == trustor {
                    continue;
                }
                let entry = table.entry(trustee).copied().unwrap_or_default();
                let mut reports = Vec::new();
                for reporter in self.configs.keys() {
                    if reporter == trustor || reporter == trustee {
                        continue;
                    }
                    let opinion = self.tables[reporter].personal_opinion_of(trustee);
                    let weight = table.node_weight_of(reporter);
                    reports.push(
                        OpinionReport::new(reporter.clone(), trustee.clone(), opinion, weight)
                            .expect("opinions and weights are in range by construction"),
                    );
                }
                let assessment =
                    assess_trust(&entry, &reports, cfg.t_min).expect("scenario validated");
                let model = cfg.control_overrides.get(trustee).unwrap_or(&cfg.control);
                let decision = ConfidenceResult::evaluate(
                    assessment.trust,
                    control_value(model),
                    cfg.disclosure_threshold,
                )
                .expect("scenario validated");
                matrix.push(TrustMatrixEntry {
                    trustor: trustor.clone(),
                    trustee: trustee.clone(),
                    assessment,
                    decision,
                });
            }
        }
        Ok(matrix)
    }

    fn schedule_at(&mut self, time: f64, pending: Pending) {
        let tick = self.next_tick;
        self.next_tick += 1;
        self.queue.push(Reverse(QueueItem { time, tick, pending }));
    }

    fn emit(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(TraceEvent { time, seq, kind });
    }

    fn process(&mut self, item: QueueItem) {
        match item.pending {
            Pending::External(index) => {
                let ScheduleItem { actor, action, .. } = self.schedule[index].clone();
                match action {
                    Action::DataRequest { target } => {
                        let retries = self.configs[&actor].retry_count;
                        self.send_data_request(item.time, actor, target, retries);
                    }
                    Action::TrustQuery { target } => {
                        self.start_query(item.time, actor, target, false);
                    }
                    Action::ConfidenceQuery { target } => {
                        self.start_query(item.time, actor, target, true);
                    }
                }
            }
            Pending::ResponseArrival { request, grade } => self.on_response(item.time, request, grade),
            Pending::RequestTimeout { request } => self.on_timeout(item.time, request),
            Pending::OpinionArrival { query, reporter } => {
                self.on_opinion(item.time, query, reporter)
            }
            Pending::QueryClose { query } => self.on_query_close(item.time, query),
        }
    }

    /// Draw the responder's behavior for a data request: does it respond,
    /// after how long, and how relevant will the requester find the answer.
    fn draw_data_response(&mut self, responder: &NodeId) -> Option<(f64, RelevanceGrade)> {
        let behavior = &self.configs[responder].behavior;
        let rng = self.rngs.get_mut(responder).expect("known node");
        if unit_f64(rng) >= behavior.respond_probability {
            return None;
        }
        let delay = behavior.response_delay.sample(rng);
        let grade = behavior.relevance_distribution.sample(rng);
        Some((delay, grade))
    }

    /// Same for an opinion request, where no relevance grade is drawn.
    fn draw_opinion_response(&mut self, responder: &NodeId) -> Option<f64> {
        let behavior = &self.configs[responder].behavior;
        let rng = self.rngs.get_mut(responder).expect("known node");
        if unit_f64(rng) >= behavior.respond_probability {
            return None;
        }
        Some(behavior.response_delay.sample(rng))
    }

    fn send_data_request(
        &mut self,
        time: f64,
        requester: NodeId,
        responder: NodeId,
        retries_left: u32,
    ) {
        let request = self.next_request;
        self.next_request += 1;
        self.emit(
            time,
            EventKind::RequestSent {
                actor: requester.clone(),
                peer: responder.clone(),
                request,
            },
        );
        self.tables
            .get_mut(&requester)
            .expect("known node")
            .record_request(&responder, time)
            .expect("validated: schedule never targets the actor itself");

        let wait = self.configs[&requester].wait_hours;
        let drawn = self.draw_data_response(&responder);
        let sent_at = time;
        self.requests.insert(
            request,
            RequestState {
                requester,
                responder,
                sent_at,
                retries_left,
            },
        );
        match drawn {
            // A response that would land outside the wait window is
            // discarded unseen; the request runs into the timeout.
            Some((delay, grade)) if delay <= wait => {
                self.schedule_at(time + delay, Pending::ResponseArrival { request, grade });
            }
            _ => {
                self.schedule_at(time + wait, Pending::RequestTimeout { request });
            }
        }
    }

    /// Score an arriving response against the requester's ledger state and
    /// record the outcome. Shared by data responses and (when enabled)
    /// opinion responses.
    fn score_and_record(
        &mut self,
        time: f64,
        requester: &NodeId,
        responder: &NodeId,
        sent_at: f64,
        grade: RelevanceGrade,
    ) -> InteractionScore {
        let privilege = self.configs[responder].behavior.granted_for(requester);
        let cfg = &self.configs[requester];
        let table = self.tables.get_mut(requester).expect("known node");
        let entry = table.entry(responder).expect("request was recorded");
        let gap_since_previous = entry
            .last_interaction_time()
            .map(|prev| (time - prev) / HOURS_PER_MONTH)
            .unwrap_or(0.0);
        let acquaintance_age =
            (time - entry.first_contact_time().expect("set on first request")) / HOURS_PER_YEAR;
        let inputs = InteractionInputs {
            response_elapsed: time - sent_at,
            gap_since_previous,
            acquaintance_age,
            privilege,
            relevance: grade,
            params_response: cfg.response_curve,
            params_gap: cfg.gap_curve,
            params_familiarity: cfg.familiarity_curve,
        };
        let score = InteractionScore::evaluate(&inputs, &cfg.weights, cfg.interaction_threshold)
            .expect("times are nonnegative along the event order");
        table
            .record_outcome(responder, score.classification, time)
            .expect("one outstanding slot per in-flight request");
        score
    }

    fn on_response(&mut self, time: f64, request: u64, grade: RelevanceGrade) {
        let state = self.requests.remove(&request).expect("scheduled once");
        let score =
            self.score_and_record(time, &state.requester, &state.responder, state.sent_at, grade);
        self.emit(
            time,
            EventKind::ResponseReceived {
                actor: state.requester,
                peer: state.responder,
                request,
                score,
            },
        );
    }

    fn on_timeout(&mut self, time: f64, request: u64) {
        let state = self.requests.remove(&request).expect("scheduled once");
        self.emit(
            time,
            EventKind::Timeout {
                actor: state.requester.clone(),
                peer: state.responder.clone(),
                request,
            },
        );
        if state.retries_left > 0 {
            self.send_data_request(time, state.requester, state.responder, state.retries_left - 1);
        }
    }

    fn start_query(&mut self, time: f64, trustor: NodeId, subject: NodeId, wants_disclosure: bool) {
        let query = self.next_query;
        self.next_query += 1;
        let wait = self.configs[&trustor].wait_hours;
        self.queries.insert(
            query,
            QueryState {
                trustor: trustor.clone(),
                subject: subject.clone(),
                wants_disclosure,
                started_at: time,
                reports: Vec::new(),
            },
        );
        let recipients: Vec<NodeId> = self
            .configs
            .keys()
            .filter(|id| **id != trustor)
            .cloned()
            .collect();
        for recipient in recipients {
            self.emit(
                time,
                EventKind::OpinionRequested {
                    actor: trustor.clone(),
                    peer: recipient.clone(),
                    subject: subject.clone(),
                    query,
                },
            );
            if self.score_opinion_responses {
                // Opinion responses count as interactions, so the request
                // itself must occupy a ledger slot.
                self.tables
                    .get_mut(&trustor)
                    .expect("known node")
                    .record_request(&recipient, time)
                    .expect("recipient list excludes the trustor");
            }
            if let Some(delay) = self.draw_opinion_response(&recipient) {
                if delay <= wait {
                    self.schedule_at(
                        time + delay,
                        Pending::OpinionArrival {
                            query,
                            reporter: recipient,
                        },
                    );
                }
            }
        }
        self.schedule_at(time + wait, Pending::QueryClose { query });
    }

    fn on_opinion(&mut self, time: f64, query: u64, reporter: NodeId) {
        let state = self.queries.get(&query).expect("query still open");
        let trustor = state.trustor.clone();
        let subject = state.subject.clone();
        let started_at = state.started_at;

        let opinion = self.tables[&reporter].personal_opinion_of(&subject);
        let score = if self.score_opinion_responses {
            Some(self.score_and_record(
                time,
                &trustor,
                &reporter,
                started_at,
                RelevanceGrade::FullyRelevant,
            ))
        } else {
            None
        };
        self.queries
            .get_mut(&query)
            .expect("query still open")
            .reports
            .push((reporter.clone(), opinion));
        self.emit(
            time,
            EventKind::OpinionReported {
                actor: reporter,
                peer: trustor,
                subject,
                query,
                opinion,
                score,
            },
        );
    }

    fn on_query_close(&mut self, time: f64, query: u64) {
        let state = self.queries.remove(&query).expect("closed once");
        let table = &self.tables[&state.trustor];
        let mut reports = Vec::new();
        for (reporter, opinion) in &state.reports {
            // The subject's own voice is excluded before aggregation; its
            // self-opinion is identically 1.
            if *reporter == state.subject {
                continue;
            }
            let weight = table.node_weight_of(reporter);
            reports.push(
                OpinionReport::new(reporter.clone(), state.subject.clone(), *opinion, weight)
                    .expect("opinions and weights are in range by construction"),
            );
        }
        let entry = table.entry(&state.subject).copied().unwrap_or_default();
        let cfg = &self.configs[&state.trustor];
        let assessment = assess_trust(&entry, &reports, cfg.t_min).expect("scenario validated");
        self.emit(
            time,
            EventKind::TrustAssessed {
                actor: state.trustor.clone(),
                peer: state.subject.clone(),
                query,
                assessment,
            },
        );
        if state.wants_disclosure {
            let cfg = &self.configs[&state.trustor];
            let model = cfg.control_overrides.get(&state.subject).unwrap_or(&cfg.control);
            let decision = ConfidenceResult::evaluate(
                assessment.trust,
                control_value(model),
                cfg.disclosure_threshold,
            )
            .expect("scenario validated");
            self.emit(
                time,
                EventKind::DisclosureDecided {
                    actor: state.trustor,
                    peer: state.subject,
                    query,
                    decision,
                },
            );
        }
    }
}

/// Validate and run a scenario to its horizon.
pub fn run_scenario(scenario: &Scenario) -> Result<SimulationTrace, ValidationError> {
    Ok(Simulation::new(scenario.clone())?.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{BehaviorProfile, DelayDistribution, RelevanceDistribution};
    use crate::score::PrivilegeLevel;
    use crate::trust::TrustBasis;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn responder_profile(p: f64, delay: f64) -> BehaviorProfile {
        BehaviorProfile {
            respond_probability: p,
            response_delay: DelayDistribution::Fixed(delay),
            relevance_distribution: RelevanceDistribution::always(RelevanceGrade::FullyRelevant),
            granted: PrivilegeLevel::new(10, 0, 10).unwrap(),
            granted_overrides: BTreeMap::new(),
        }
    }

    fn pair_scenario(respond_probability: f64) -> Scenario {
        let mut schedule: Vec<ScheduleItem> = (0..5)
            .map(|k| ScheduleItem {
                time: (k * 10) as f64,
                actor: id("a"),
                action: Action::DataRequest { target: id("b") },
            })
            .collect();
        schedule.push(ScheduleItem {
            time: 60.0,
            actor: id("a"),
            action: Action::TrustQuery { target: id("b") },
        });
        Scenario {
            nodes: alloc::vec![
                NodeConfig::with_defaults(id("a"), 10, 1.0, 48.0, responder_profile(0.0, 0.0)),
                NodeConfig::with_defaults(
                    id("b"),
                    10,
                    1.0,
                    48.0,
                    responder_profile(respond_probability, 0.0),
                ),
            ],
            schedule,
            horizon_hours: 200.0,
            seed: 7,
            score_opinion_responses: false,
        }
    }

    #[test]
    fn empty_scenario_produces_empty_trace() {
        let scenario = Scenario {
            nodes: Vec::new(),
            schedule: Vec::new(),
            horizon_hours: 10.0,
            seed: 0,
            score_opinion_responses: false,
        };
        let trace = run_scenario(&scenario).unwrap();
        assert!(trace.events.is_empty());
        assert!(trace.final_tables.is_empty());
        assert!(trace.trust_matrix.is_empty());
    }

    #[test]
    fn perfect_responder_yields_unit_opinion() {
        let trace = run_scenario(&pair_scenario(1.0)).unwrap();
        let entry = trace.final_tables[&id("a")].entry(&id("b")).copied().unwrap();
        assert_eq!((entry.positive(), entry.negative(), entry.total()), (5, 0, 5));
        assert_eq!(entry.personal_opinion(), 1.0);
    }

    #[test]
    fn silent_responder_yields_no_opinion_and_zero_trust() {
        let trace = run_scenario(&pair_scenario(0.0)).unwrap();
        let entry = trace.final_tables[&id("a")].entry(&id("b")).copied().unwrap();
        assert_eq!((entry.positive(), entry.negative(), entry.total()), (0, 0, 5));
        assert_eq!(entry.personal_opinion(), 0.0);
        let assessed = trace
            .events
            .iter()
            .find_map(|e| match &e.kind {
                EventKind::TrustAssessed { assessment, .. } => Some(*assessment),
                _ => None,
            })
            .expect("trust query ran");
        assert_eq!(assessed.trust, 0.0);
        assert_eq!(assessed.basis, TrustBasis::Combined);
        let timeouts = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Timeout { .. }))
            .count();
        assert_eq!(timeouts, 5);
    }

    #[test]
    fn snapshot_refuses_future_times() {
        let mut sim = Simulation::new(pair_scenario(1.0)).unwrap();
        sim.advance_to(50.0);
        assert!(sim.snapshot_trust_matrix(50.0).is_ok());
        assert!(matches!(
            sim.snapshot_trust_matrix(51.0),
            Err(QueryError::FutureTime { .. })
        ));
    }

    #[test]
    fn snapshot_has_all_ordered_pairs_in_range() {
        let trace = run_scenario(&pair_scenario(1.0)).unwrap();
        assert_eq!(trace.trust_matrix.len(), 2);
        for cell in &trace.trust_matrix {
            assert!((-1.0..=1.0).contains(&cell.assessment.trust));
        }
    }

    #[test]
    fn retries_issue_fresh_requests() {
        let mut scenario = pair_scenario(0.0);
        scenario.nodes[0].retry_count = 2;
        scenario.schedule.truncate(1); // a single original request
        let trace = run_scenario(&scenario).unwrap();
        let sent = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::RequestSent { .. }))
            .count();
        let timeouts = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Timeout { .. }))
            .count();
        assert_eq!(sent, 3);
        assert_eq!(timeouts, 3);
        let entry = trace.final_tables[&id("a")].entry(&id("b")).copied().unwrap();
        assert_eq!(entry.total(), 3);
    }

    #[test]
    fn late_responses_are_discarded_as_timeouts() {
        let mut scenario = pair_scenario(1.0);
        scenario.nodes[1].behavior.response_delay = DelayDistribution::Fixed(100.0);
        scenario.schedule.truncate(1);
        let trace = run_scenario(&scenario).unwrap();
        assert!(trace
            .events
            .iter()
            .any(|e| matches!(e.kind, EventKind::Timeout { .. })));
        assert!(!trace
            .events
            .iter()
            .any(|e| matches!(e.kind, EventKind::ResponseReceived { .. })));
    }

    #[test]
    fn events_are_ordered_by_time_then_seq() {
        let trace = run_scenario(&pair_scenario(1.0)).unwrap();
        for pair in trace.events.windows(2) {
            assert!(pair[0].time <= pair[1].time);
            assert!(pair[0].seq < pair[1].seq);
        }
    }
}
