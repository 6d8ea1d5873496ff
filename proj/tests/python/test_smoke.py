import math

import pytest

binode = pytest.importorskip("binode")


def test_rate_law_eval():
    mm = binode.make_rate_law("michaelis_menten", {"V_max": 1.0, "K_m": 1.0}, 1)
    assert mm([1.0]) == pytest.approx(0.5)
    assert binode.power_law(2.0, [1.0, 1.0], [3.0, 4.0]) == pytest.approx(24.0)


def test_nnp_forward_and_mask():
    spec = binode.NnpSpec()
    spec.input_mask = [True, False]
    spec.hidden_layers = 2
    spec.hidden_width = 3
    nnp = binode.init_nnp(spec, seed=7)
    a = nnp.forward([0.5, 1.0])
    b = nnp.forward([0.5, -99.0])
    assert a == b
    assert a > 0.0  # softplus output


def test_reference_simulation_matches_closed_form():
    trajs = binode.simulate_reference("pk")
    assert len(trajs) == 1
    t = trajs[0]
    for time, state in zip(t.times, t.states):
        assert state[1] == pytest.approx(0.1 * math.exp(-0.72 * time), abs=1e-7)


def test_model_roundtrip_and_vector_field():
    model = binode.build_monod_binode(seed=0)
    text = binode.model_to_json(model)
    back = binode.model_from_json(text)
    dx_a = model.vector_field([0.1, 0.4])
    dx_b = back.vector_field([0.1, 0.4])
    assert dx_a == dx_b
    assert len(dx_a) == 2


def test_short_training_run_improves_loss():
    model = binode.build_monod_binode(seed=1)
    data = binode.generate_training_set("monod")
    cfg = binode.TrainConfig()
    cfg.batch_size = 6
    cfg.horizon = 3
    cfg.dt = 0.05
    cfg.max_epochs = 60
    cfg.seed = 4
    result = binode.train(model, data, cfg)
    assert not result.diverged
    assert len(result.loss_history) == 60
    assert result.best_loss < result.loss_history[0]


def test_surface_shape():
    model = binode.build_pk_binode(seed=0)
    surface = binode.extract_surface(
        model, 0, 0, [0, 1], [0.0, 0.0], [0.1, 0.1], [5, 5], [0.0, 0.0, 0.05]
    )
    assert len(surface.values) == 25
    assert surface.row == 0
