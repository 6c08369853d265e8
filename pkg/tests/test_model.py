import pytest

from qbvsim.model import (
    LinkSpec,
    Macrotick,
    NodeId,
    NodeSpec,
    StreamSpec,
    Topology,
    ceil_div,
    default_topology,
    sending_delay,
    tx_duration_ns,
    validate_topology,
)


def test_ceil_div():
    assert ceil_div(10, 5) == 2
    assert ceil_div(11, 5) == 3
    assert ceil_div(0, 5) == 0


class TestMacrotick:
    def test_default_16ns(self):
        assert Macrotick().ns == 16

    def test_quantize_up(self):
        m = Macrotick(16)
        assert m.quantize_up(0) == 0
        assert m.quantize_up(1) == 16
        assert m.quantize_up(16) == 16
        assert m.quantize_up(17) == 32

    def test_alignment(self):
        m = Macrotick(16)
        assert m.is_aligned(32)
        assert not m.is_aligned(24)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Macrotick(0)


class TestSendingDelay:
    def test_200B_at_1gbps(self):
        link = LinkSpec(NodeId.MS, NodeId.NW, 10**9, 0)
        assert sending_delay(200, link) == 1600

    def test_1500B_at_1gbps(self):
        link = LinkSpec(NodeId.MS, NodeId.NW, 10**9, 0)
        assert sending_delay(1500, link) == 12000

    def test_prop_delay_adds(self):
        link = LinkSpec(NodeId.MS, NodeId.NW, 10**9, 500)
        assert sending_delay(200, link) == 2100

    def test_tx_duration_rounds_up(self):
        # 8 bits at 3 bps -> 2666.66 ns, must round up
        assert tx_duration_ns(1, 3_000_000) == 2667

    def test_monotone_in_length(self):
        link = LinkSpec(NodeId.MS, NodeId.NW, 10**9, 0)
        prev = 0
        for n in (1, 64, 200, 1500):
            d = sending_delay(n, link)
            assert d >= prev
            prev = d


class TestTopology:
    def test_default_is_valid(self):
        assert validate_topology(default_topology()) == []

    def test_symmetric_lookup(self):
        topo = default_topology()
        fwd = topo.link(NodeId.MS, NodeId.NW)
        rev = topo.link(NodeId.NW, NodeId.MS)
        assert rev is not None
        assert rev.bandwidth_bps == fwd.bandwidth_bps
        assert rev.prop_delay_ns == fwd.prop_delay_ns

    def test_missing_link_reported(self):
        topo = default_topology()
        broken = Topology(topo.nodes, tuple(l for l in topo.links
                                            if l.src != NodeId.MS))
        kinds = {v.kind for v in validate_topology(broken)}
        assert "PathBroken" in kinds

    def test_zero_bandwidth_reported(self):
        topo = default_topology()
        links = tuple(
            LinkSpec(l.src, l.dst, 0, l.prop_delay_ns) if l.src == NodeId.DS else l
            for l in topo.links
        )
        kinds = {v.kind for v in validate_topology(Topology(topo.nodes, links))}
        assert "BadBandwidth" in kinds

    def test_missing_node_reported(self):
        topo = default_topology()
        nodes = tuple(n for n in topo.nodes if n.id != NodeId.SL)
        kinds = {v.kind for v in validate_topology(Topology(nodes, topo.links))}
        assert "MissingNode" in kinds

    def test_asymmetric_links_reported(self):
        topo = default_topology()
        links = topo.links + (LinkSpec(NodeId.NW, NodeId.MS, 10**8, 0),)
        kinds = {v.kind for v in validate_topology(Topology(topo.nodes, links))}
        assert "LinkAsymmetry" in kinds

    def test_validation_idempotent(self):
        topo = default_topology()
        assert validate_topology(topo) == validate_topology(topo)


class TestStreamSpec:
    def test_dc_needs_burst_and_cycle(self):
        with pytest.raises(ValueError):
            StreamSpec.dc(2, 200)
        s = StreamSpec.dc(2, 200, burst_size=6, app_cycle_ns=30_000_000)
        assert s.emit_interval_ns() == 30_000_000

    def test_backlog_dc_has_no_interval(self):
        s = StreamSpec.dc(2, 200, backlog=True)
        with pytest.raises(ValueError):
            s.emit_interval_ns()

    def test_be_interval(self):
        # 1500 B at 30 Mbps -> one frame every 400 us
        s = StreamSpec.be(0, 1500, 30_000_000)
        assert s.emit_interval_ns() == 400_000

    def test_pcp_range(self):
        with pytest.raises(ValueError):
            StreamSpec.be(8, 1500, 30_000_000)
