"""Per-run orchestration: one event loop wiring mobility, radio, beaconing, routing.

A run is single-threaded and fully deterministic for a given scenario and
seed: per-concern random streams are derived once from the master seed, events
tie-break on scheduling order, and nothing reads wall-clock time. Independent
runs share no state and are safe to execute in parallel processes.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from . import beaconing, routing
from .beaconing import (CAUSE_DISTANCE, CAUSE_INDEX, CAUSE_INITIAL, CAUSE_MP,
                        CAUSE_ODL, CAUSE_PERIODIC, CAUSE_SPEED, CAUSES, Beacon)
from .config import ScenarioConfig
from .engine import EventKind, EventQueue, spawn_streams
from .metrics import FlowStats, MetricsReport
from .mobility import KinematicSnapshot, MobilityField
from .neighbors import NeighborStore, SOURCE_BEACON, SOURCE_PIGGYBACK
from .radio import (BROADCAST_RECV, BROADCAST_SEND, EnergyLedger,
                    LocalizationErrorModel, P2P_RECV, P2P_SEND,
                    PROMISCUOUS_DISCARD, PROMISCUOUS_RECV, RadioEnvironment,
                    RadioModel)
from .routing import DataPacket, DROPPED_RETRIES, DROPPED_VOID, select_next_hop


class Simulation:
    """One scenario run. Construct, optionally adjust state (tests may seed
    neighbor tables or script waypoints), then call run()."""

    def __init__(self, config: ScenarioConfig, *, positions=None, plans=None,
                 record_energy_events: bool = False):
        config.validate()
        self.config = config
        n = config.node_count
        self.n = n
        streams = spawn_streams(config.seed)
        self.mobility_rng = streams["mobility"]
        self.traffic_rng = streams["traffic"]
        self.localization_rng = streams["localization"]

        self.queue = EventQueue()
        self.field = MobilityField(config, self.mobility_rng, positions, plans)
        self.ledger = EnergyLedger(n, record_events=record_energy_events)
        self.radio = RadioEnvironment(
            RadioModel(config.radio_model, config.radio_range,
                       config.loss_probability if config.radio_model == "lossy-disk" else 0.0),
            self.ledger, streams["radio"])
        self.store = NeighborStore(n)
        self.loc_model = LocalizationErrorModel(config.localization_sigma)

        # Last-advertised kinematics per node (what neighbors predict from).
        self.lb_x = np.zeros(n)
        self.lb_y = np.zeros(n)
        self.lb_vx = np.zeros(n)
        self.lb_vy = np.zeros(n)
        self.lb_t = np.zeros(n)
        self.last_beacon_time = np.full(n, -np.inf)
        self.db_odometer = np.zeros(n)
        self._db_prev_positions = None

        self.beacon_counts = np.zeros((n, len(CAUSES)), dtype=np.int64)

        # Traffic state
        self.flows: list[tuple[int, int]] = []
        self.flow_stats: list[FlowStats] = []
        self.generated = 0
        self.delivered = 0
        self.dropped_void = 0
        self.dropped_retries = 0
        self.forwarding_ops = 0
        self.retry_transmissions = 0
        self.delay_sum = 0.0
        self.hop_sum = 0
        self._packet_seq = 0

        self.accuracy_samples = []
        self._mobility_hasher = hashlib.sha256()
        self.traffic_hash = ""
        self.event_count = 0
        self.delivered_packets: list[DataPacket] = []  # only with collect_traces

        # Test/instrumentation hooks
        self.on_tick = None      # fn(sim, now) after purge and strategy checks
        self.on_beacon = None    # fn(beacon)
        self.on_purge = None     # fn(owners, nbrs, now)

        self._latency_p2p = (config.packet_size * 8.0 / config.p2p_rate_bps
                             + config.processing_delay)
        self._latency_broadcast = (config.beacon_size * 8.0 / config.broadcast_rate_bps
                                   + config.processing_delay)
        self._setup_done = False

    # -- setup -----------------------------------------------------------------

    def setup(self) -> None:
        """Schedule the run's skeleton: legs, ticks, samples, beacons, traffic."""
        if self._setup_done:
            return
        self._setup_done = True
        cfg = self.config

        for when, node in self.field.start_legs(0.0, self.mobility_rng):
            self.queue.schedule(when, EventKind.WAYPOINT_CHANGE, node)

        # Ticks and samples are pre-scheduled so they take the earliest
        # sequence numbers at their fire times: a tick processing at the same
        # instant as a packet event runs first, which fixes beacon-cause
        # attribution when triggers coincide.
        tick = cfg.tick_interval
        k = 1
        while k * tick < cfg.duration:
            self.queue.schedule(k * tick, EventKind.NODE_TICK)
            k += 1
        interval = cfg.metrics_sample_interval
        k = 1
        while k * interval <= cfg.duration:
            self.queue.schedule(k * interval, EventKind.METRICS_SAMPLE)
            k += 1

        # Advertised state starts at the truth so the prediction rule is quiet
        # until a node actually deviates (also used when initial beacons are
        # suppressed in tests).
        positions = self.field.positions_at(0.0)
        self.lb_x[:] = positions[:, 0]
        self.lb_y[:] = positions[:, 1]
        self.lb_vx[:] = self.field.velocity[:, 0]
        self.lb_vy[:] = self.field.velocity[:, 1]
        self.lb_t[:] = 0.0
        if cfg.strategy == "DB":
            self._db_prev_positions = positions.copy()

        if cfg.initial_beacons:
            for i in range(self.n):
                self._emit_beacon(i, CAUSE_INITIAL, 0.0, positions)

        if cfg.strategy == "PB":
            if cfg.pb_interval < cfg.duration:
                for i in range(self.n):
                    self.queue.schedule(cfg.pb_interval, EventKind.BEACON_EMIT, i)
        elif cfg.strategy == "SB":
            for i in range(self.n):
                when = beaconing.sb_next(self.field.speed[i], 0.0,
                                         cfg.sb_interval_min, cfg.sb_interval_max,
                                         cfg.sb_speed_low, cfg.sb_vhigh)
                if when < cfg.duration:
                    self.queue.schedule(when, EventKind.BEACON_EMIT, i)

        self._setup_traffic()

    def _setup_traffic(self) -> None:
        cfg = self.config
        rng = self.traffic_rng
        hasher = hashlib.sha256()
        if cfg.flow_count and cfg.node_count > 1:
            total_pairs = cfg.node_count * (cfg.node_count - 1)
            picks = rng.choice(total_pairs, size=cfg.flow_count, replace=False)
            for flow_id, pick in enumerate(picks):
                src = int(pick) // (cfg.node_count - 1)
                rem = int(pick) % (cfg.node_count - 1)
                dst = rem + (1 if rem >= src else 0)
                self.flows.append((src, dst))
                self.flow_stats.append(FlowStats(flow_id, src, dst))
                hasher.update(np.int64(src).tobytes())
                hasher.update(np.int64(dst).tobytes())
        horizon = cfg.duration - cfg.traffic_stop
        if cfg.packet_rate > 0:
            for flow_id in range(len(self.flows)):
                period = 1.0 / cfg.packet_rate
                start = cfg.traffic_start + rng.uniform(0.0, period)
                when = start
                while when < horizon:
                    self.queue.schedule(when, EventKind.PACKET_GENERATION, flow_id)
                    hasher.update(np.float64(when).tobytes())
                    when += period
        self.traffic_hash = hasher.hexdigest()

    # -- localization -----------------------------------------------------------

    def _observe(self, position) -> tuple[float, float]:
        sigma = self.loc_model.sigma
        if sigma == 0.0:
            return (float(position[0]), float(position[1]))
        noise = self.localization_rng.normal(0.0, sigma, size=2)
        return (float(position[0] + noise[0]), float(position[1] + noise[1]))

    def _observe_all(self, positions: np.ndarray) -> np.ndarray:
        sigma = self.loc_model.sigma
        if sigma == 0.0:
            return positions
        return positions + self.localization_rng.normal(0.0, sigma, positions.shape)

    # -- beacons -----------------------------------------------------------------

    def _emit_beacon(self, node: int, cause: str, now: float,
                     positions: np.ndarray, observed=None) -> None:
        cfg = self.config
        if observed is None:
            observed = self._observe(positions[node])
        vx, vy = self.field.velocity[node]
        beacon = Beacon(node, observed[0], observed[1], float(vx), float(vy),
                        now, cause, cfg.beacon_size)
        self.lb_x[node] = beacon.x
        self.lb_y[node] = beacon.y
        self.lb_vx[node] = beacon.vx
        self.lb_vy[node] = beacon.vy
        self.lb_t[node] = now
        self.db_odometer[node] = 0.0
        self.last_beacon_time[node] = now
        self.beacon_counts[node, CAUSE_INDEX[cause]] += 1
        if self.on_beacon is not None:
            self.on_beacon(beacon)
        self.ledger.charge(BROADCAST_SEND, node, cfg.beacon_size)
        receivers = np.flatnonzero(self.radio.reachable_mask(positions, node))
        self.queue.schedule(now + self._latency_broadcast, EventKind.PACKET_ARRIVAL,
                            ("beacon", beacon, receivers))

    def _handle_beacon_arrival(self, beacon: Beacon, receivers: np.ndarray,
                               now: float) -> None:
        cfg = self.config
        if receivers.size == 0:
            return
        self.ledger.charge_many(BROADCAST_RECV, receivers, cfg.beacon_size)
        speed = math.hypot(beacon.vx, beacon.vy)
        expiry = now + beaconing.entry_lifetime(cfg, speed)
        self.store.upsert_many(receivers, beacon.sender, beacon.snapshot(),
                               SOURCE_BEACON, expiry)

    def _handle_scheduled_beacon(self, node: int, now: float) -> None:
        cfg = self.config
        positions = self.field.positions_at(now)
        if cfg.strategy == "PB":
            self._emit_beacon(node, CAUSE_PERIODIC, now, positions)
            nxt = beaconing.pb_next(cfg.pb_interval, now)
        else:
            self._emit_beacon(node, CAUSE_SPEED, now, positions)
            nxt = beaconing.sb_next(float(self.field.speed[node]), now,
                                    cfg.sb_interval_min, cfg.sb_interval_max,
                                    cfg.sb_speed_low, cfg.sb_vhigh)
        if nxt < cfg.duration:
            self.queue.schedule(nxt, EventKind.BEACON_EMIT, node)

    # -- per-tick self checks -----------------------------------------------------

    def _handle_tick(self, now: float) -> None:
        cfg = self.config
        positions = self.field.positions_at(now)
        owners, nbrs = self.store.purge_all(positions, now, cfg.radio_range)
        if self.on_purge is not None and owners.size:
            self.on_purge(owners, nbrs, now)

        if cfg.strategy == "APU":
            observed = self._observe_all(positions)
            dt = now - self.lb_t
            dev_x = observed[:, 0] - (self.lb_x + dt * self.lb_vx)
            dev_y = observed[:, 1] - (self.lb_y + dt * self.lb_vy)
            deviation2 = dev_x * dev_x + dev_y * dev_y
            for node in np.flatnonzero(deviation2 > cfg.aer ** 2):
                self._emit_beacon(int(node), CAUSE_MP, now, positions,
                                  observed=(float(observed[node, 0]),
                                            float(observed[node, 1])))
        elif cfg.strategy == "DB":
            step = positions - self._db_prev_positions
            self.db_odometer += np.hypot(step[:, 0], step[:, 1])
            self._db_prev_positions = positions.copy()
            for node in np.flatnonzero(self.db_odometer > cfg.db_threshold):
                self._emit_beacon(int(node), CAUSE_DISTANCE, now, positions)

        if self.on_tick is not None:
            self.on_tick(self, now)

    # -- traffic -------------------------------------------------------------------

    def _handle_generation(self, flow_id: int, now: float) -> None:
        src, dst = self.flows[flow_id]
        dest_pos = self.field.position_of(dst, now)  # oracle location service
        packet = DataPacket(self._packet_seq, flow_id, src, dst,
                            float(dest_pos[0]), float(dest_pos[1]),
                            self.config.packet_size, now)
        self._packet_seq += 1
        self.generated += 1
        self.flow_stats[flow_id].generated += 1
        self._route(src, packet, now, had_retry_failure=False)

    def _route(self, node: int, packet: DataPacket, now: float,
               had_retry_failure: bool) -> None:
        """Pick the next hop at `node` and launch the first unicast attempt."""
        if node == packet.destination:
            self._deliver(packet, now)
            return
        if packet.hops >= self.config.max_hops:
            self._drop(packet, DROPPED_VOID)
            return
        self_pos = self._observe(self.field.position_of(node, now))
        nxt = select_next_hop(self.store, node, self_pos,
                              (packet.dest_x, packet.dest_y), now)
        if nxt is None:
            self._drop(packet, DROPPED_RETRIES if had_retry_failure else DROPPED_VOID)
            return
        if self.config.collect_traces:
            packet.progress.append(math.hypot(self_pos[0] - packet.dest_x,
                                              self_pos[1] - packet.dest_y))
        self.forwarding_ops += 1
        self._attempt(node, nxt, packet, 1, now)

    def _attempt(self, sender: int, receiver: int, packet: DataPacket,
                 attempt: int, now: float) -> None:
        cfg = self.config
        if attempt > 1:
            self.retry_transmissions += 1
        sender_pos = self.field.position_of(sender, now)
        packet.piggyback = KinematicSnapshot(
            *self._observe(sender_pos),
            float(self.field.velocity[sender, 0]),
            float(self.field.velocity[sender, 1]), now)
        self.ledger.charge(P2P_SEND, sender, packet.size)
        positions = self.field.positions_at(now)
        mask = self.radio.reachable_mask(positions, sender)
        delivered = bool(mask[receiver])
        mask[receiver] = False
        bystanders = np.flatnonzero(mask)
        kind = EventKind.PACKET_ARRIVAL if delivered else EventKind.RETRANSMIT_TIMEOUT
        self.queue.schedule(now + self._latency_p2p, kind,
                            ("data", packet, sender, receiver, bystanders, attempt))

    def _handle_data_arrival(self, packet: DataPacket, sender: int, receiver: int,
                             bystanders: np.ndarray, now: float) -> None:
        self.ledger.charge(P2P_RECV, receiver, packet.size)
        self._process_overhears(bystanders, sender, packet, now)
        packet.hops += 1
        packet.trace.append(sender)
        if self.config.strategy == "APU":
            # The addressee learns from the piggyback exactly like an overhearer.
            was_new = self.store.upsert(receiver, sender, packet.piggyback,
                                        SOURCE_PIGGYBACK)
            if was_new and self.last_beacon_time[receiver] != now:
                self._emit_beacon(receiver, CAUSE_ODL, now,
                                  self.field.positions_at(now))
        self._route(receiver, packet, now, had_retry_failure=False)

    def _handle_data_failure(self, packet: DataPacket, sender: int, receiver: int,
                             bystanders: np.ndarray, attempt: int, now: float) -> None:
        self._process_overhears(bystanders, sender, packet, now)
        if attempt < self.config.retry_limit:
            self._attempt(sender, receiver, packet, attempt + 1, now)
            return
        # Retries exhausted: the chosen entry was a false neighbor.
        if self.store.contains(sender, receiver):
            self.store.remove(sender, receiver)
        self._route(sender, packet, now, had_retry_failure=True)

    def _process_overhears(self, bystanders: np.ndarray, sender: int,
                           packet: DataPacket, now: float) -> None:
        """Every in-range non-addressee hears each unicast attempt.

        Under the adaptive strategy the overheard piggyback is processed (new
        sender: answer with a beacon; known sender: refresh the entry), costing
        promiscuous-receive energy. Baselines carry no piggyback processing, so
        overheard data costs them only a promiscuous discard.
        """
        if bystanders.size == 0:
            return
        if self.config.strategy != "APU":
            self.ledger.charge_many(PROMISCUOUS_DISCARD, bystanders, packet.size)
            return
        self.ledger.charge_many(PROMISCUOUS_RECV, bystanders, packet.size)
        was_new = self.store.upsert_many(bystanders, sender, packet.piggyback,
                                         SOURCE_PIGGYBACK)
        if not was_new.any():
            return
        positions = self.field.positions_at(now)
        for b in bystanders[was_new]:
            # One beacon per node per instant keeps trigger causes exclusive.
            if self.last_beacon_time[b] != now:
                self._emit_beacon(int(b), CAUSE_ODL, now, positions)

    # -- packet terminals ---------------------------------------------------------

    def _deliver(self, packet: DataPacket, now: float) -> None:
        self.delivered += 1
        self.delay_sum += now - packet.created
        self.hop_sum += packet.hops
        stats = self.flow_stats[packet.flow_id]
        stats.delivered += 1
        stats.delay_sum += now - packet.created
        stats.hop_sum += packet.hops
        if self.config.collect_traces:
            self.delivered_packets.append(packet)

    def _drop(self, packet: DataPacket, outcome: str) -> None:
        if outcome == DROPPED_VOID:
            self.dropped_void += 1
            self.flow_stats[packet.flow_id].dropped_void += 1
        else:
            self.dropped_retries += 1
            self.flow_stats[packet.flow_id].dropped_retries += 1

    # -- sampling -------------------------------------------------------------------

    def _handle_sample(self, now: float) -> None:
        positions = self.field.positions_at(now)
        self.accuracy_samples.append(
            self.store.accuracy_sample(positions, now, self.config.radio_range))
        self._mobility_hasher.update(positions.tobytes())

    # -- main loop --------------------------------------------------------------------

    def run(self) -> MetricsReport:
        self.setup()
        cfg = self.config
        queue = self.queue
        while True:
            when = queue.peek_time()
            if when is None or when > cfg.duration:
                break
            event = queue.pop()
            self.event_count += 1
            kind = event.kind
            if kind is EventKind.NODE_TICK:
                self._handle_tick(event.fire_time)
            elif kind is EventKind.PACKET_ARRIVAL:
                data = event.data
                if data[0] == "beacon":
                    self._handle_beacon_arrival(data[1], data[2], event.fire_time)
                else:
                    self._handle_data_arrival(data[1], data[2], data[3], data[4],
                                              event.fire_time)
            elif kind is EventKind.RETRANSMIT_TIMEOUT:
                _, packet, sender, receiver, bystanders, attempt = event.data
                self._handle_data_failure(packet, sender, receiver, bystanders,
                                          attempt, event.fire_time)
            elif kind is EventKind.PACKET_GENERATION:
                self._handle_generation(event.data, event.fire_time)
            elif kind is EventKind.WAYPOINT_CHANGE:
                nxt = self.field.handle_waypoint(event.data, event.fire_time,
                                                 self.mobility_rng)
                if nxt is not None:
                    self.queue.schedule(nxt, EventKind.WAYPOINT_CHANGE, event.data)
            elif kind is EventKind.BEACON_EMIT:
                self._handle_scheduled_beacon(event.data, event.fire_time)
            elif kind is EventKind.METRICS_SAMPLE:
                self._handle_sample(event.fire_time)
        return self._build_report()

    def _build_report(self) -> MetricsReport:
        return MetricsReport(
            config=self.config,
            beacon_counts=self.beacon_counts.copy(),
            accuracy=list(self.accuracy_samples),
            flows=list(self.flow_stats),
            generated=self.generated,
            delivered=self.delivered,
            dropped_void=self.dropped_void,
            dropped_retries=self.dropped_retries,
            forwarding_ops=self.forwarding_ops,
            retry_transmissions=self.retry_transmissions,
            delay_sum=self.delay_sum,
            hop_sum=self.hop_sum,
            energy=self.ledger.energy.copy(),
            energy_counts=self.ledger.counts.copy(),
            energy_bytes=self.ledger.bytes.copy(),
            mobility_hash=self._mobility_hasher.hexdigest(),
            traffic_hash=self.traffic_hash,
            event_count=self.event_count,
        )


def run_scenario(config: ScenarioConfig) -> MetricsReport:
    """Simulate one scenario end to end; same config and seed give identical reports."""
    return Simulation(config).run()
