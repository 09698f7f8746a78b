"""Scenario document validation and the typed scenario it produces."""

import copy
import json
import random

import pytest

from adtrap.errors import ValidationError
from adtrap.scenario import load_scenario, load_scenario_document, read_scenario_file

from conftest import SMALL_TAXONOMY_DOC
from generators import random_scenario_document


def base_document():
    return {
        "spec_version": 1,
        "seed": 42,
        "window_length_s": 1800,
        "horizon_s": 3600,
        "taxonomy": copy.deepcopy(SMALL_TAXONOMY_DOC),
        "websites": [
            {
                "id": "monads",
                "domain": "monads.example",
                "owner": "attacker",
                "logging": True,
                "pages": [{"id": "landing", "topics": ["t_soccer"]}],
            },
            {
                "id": "kickoff",
                "domain": "kickoff.example",
                "owner": "third-party",
                "logging": False,
                "pages": [{"id": "fixtures", "topics": ["t_soccer", "t_tennis"]}],
            },
        ],
        "campaigns": [
            {
                "id": "rival",
                "total_budget": 100.0,
                "ad_groups": [
                    {
                        "id": "rival_g",
                        "ads": [{"id": "rival_ad"}],
                        "target_audiences": ["a_sports"],
                        "bid": {"kind": "CPM", "amount": 10.0},
                        "placement": [],
                    }
                ],
            }
        ],
        "users": [
            {
                "id": "u1",
                "cookie_id": "dc-u1",
                "network_id": "203.0.113.1",
                "warmup_plan": [{"page": "fixtures", "repeat": 2}],
                "attack_visits": [{"site": "monads", "t": 300.0}],
            }
        ],
        "attack": {
            "sites": ["monads"],
            "audiences": ["a_sports", "a_pets"],
            "cpm": 50.0,
        },
    }


def test_valid_document_loads():
    scenario = load_scenario_document(base_document())
    assert scenario.seed == 42
    assert scenario.window_length == 1800
    assert scenario.horizon == 3600
    assert set(scenario.websites) == {"monads", "kickoff"}
    assert scenario.websites["monads"].owner == "attacker"
    assert scenario.campaigns[0].id == "rival"
    assert scenario.users[0].warmup_plan[0].repeat == 2
    assert scenario.attack.audiences == ("a_sports", "a_pets")
    assert scenario.attack.budget == 1_000_000.0  # default
    assert scenario.profile_config.score_mode == "count"


def test_window_length_defaults_to_thirty_minutes():
    doc = base_document()
    del doc["window_length_s"]
    assert load_scenario_document(doc).window_length == 1800


def test_attack_is_optional():
    doc = base_document()
    doc["attack"] = None
    doc["users"][0]["attack_visits"] = []
    scenario = load_scenario_document(doc)
    assert scenario.attack is None


def reject(doc, pointer):
    with pytest.raises(ValidationError) as err:
        load_scenario_document(doc)
    assert err.value.pointer == pointer, str(err.value)
    return err.value


def test_spec_version_checked():
    doc = base_document()
    doc["spec_version"] = 2
    reject(doc, "/spec_version")


def test_horizon_required_and_positive():
    doc = base_document()
    del doc["horizon_s"]
    reject(doc, "/horizon_s")
    doc = base_document()
    doc["horizon_s"] = 0
    reject(doc, "/horizon_s")


def test_seed_must_fit_64_bits():
    doc = base_document()
    doc["seed"] = 2**64
    reject(doc, "/seed")
    doc["seed"] = True
    reject(doc, "/seed")
    doc["seed"] = -(2**63)
    load_scenario_document(doc)


def test_taxonomy_errors_carry_prefixed_pointer():
    doc = base_document()
    doc["taxonomy"]["interests"][0]["source_topics"] = ["t_ghost"]
    reject(doc, "/taxonomy/interests/0/source_topics/0")


def test_duplicate_website_id():
    doc = base_document()
    doc["websites"].append(copy.deepcopy(doc["websites"][0]))
    doc["websites"][2]["pages"][0]["id"] = "other"
    reject(doc, "/websites/2/id")


def test_page_ids_unique_across_websites():
    doc = base_document()
    doc["websites"][1]["pages"][0]["id"] = "landing"
    reject(doc, "/websites/1/pages/0/id")


def test_page_with_unknown_topic():
    doc = base_document()
    doc["websites"][0]["pages"][0]["topics"] = ["t_ghost"]
    reject(doc, "/websites/0/pages/0/topics")


def test_page_without_topics():
    doc = base_document()
    doc["websites"][0]["pages"][0]["topics"] = []
    reject(doc, "/websites/0/pages/0/topics")


def test_website_without_pages():
    doc = base_document()
    doc["websites"][0]["pages"] = []
    reject(doc, "/websites/0/pages")


def test_reserved_campaign_prefix():
    doc = base_document()
    doc["campaigns"][0]["id"] = "trap_monads"
    reject(doc, "/campaigns/0/id")


def test_campaign_with_unknown_audience():
    doc = base_document()
    doc["campaigns"][0]["ad_groups"][0]["target_audiences"] = ["a_ghost"]
    reject(doc, "/campaigns/0/ad_groups/0/target_audiences/0")


def test_campaign_with_unknown_placement_site():
    doc = base_document()
    doc["campaigns"][0]["ad_groups"][0]["placement"] = ["ghost_site"]
    reject(doc, "/campaigns/0/ad_groups/0/placement/0")


def test_bad_bid_kind_points_at_bid():
    doc = base_document()
    doc["campaigns"][0]["ad_groups"][0]["bid"] = {"kind": "CPX", "amount": 1.0}
    reject(doc, "/campaigns/0/ad_groups/0/bid")


def test_zero_bid_amount_rejected():
    doc = base_document()
    doc["campaigns"][0]["ad_groups"][0]["bid"] = {"kind": "CPM", "amount": 0}
    reject(doc, "/campaigns/0/ad_groups/0/bid")


def test_duplicate_user_cookie_and_network_ids():
    doc = base_document()
    second = copy.deepcopy(doc["users"][0])
    second["id"] = "u2"
    second["network_id"] = "203.0.113.2"
    doc["users"].append(second)
    reject(doc, "/users/1/cookie_id")
    doc["users"][1]["cookie_id"] = "dc-u2"
    doc["users"][1]["network_id"] = "203.0.113.1"
    reject(doc, "/users/1/network_id")


def test_cookie_and_network_namespaces_disjoint():
    doc = base_document()
    doc["users"][0]["network_id"] = "dc-u1"  # same string as their cookie id
    reject(doc, "/users")


def test_cookie_network_overlap_across_users():
    doc = base_document()
    second = copy.deepcopy(doc["users"][0])
    second["id"] = "u2"
    second["cookie_id"] = "203.0.113.1"  # another user's network id
    second["network_id"] = "203.0.113.2"
    doc["users"].append(second)
    reject(doc, "/users")


def test_attack_visit_time_bounds():
    doc = base_document()
    doc["users"][0]["attack_visits"] = [{"site": "monads", "t": 3600.0}]
    reject(doc, "/users/0/attack_visits/0/t")
    doc["users"][0]["attack_visits"] = [{"site": "monads", "t": -1.0}]
    reject(doc, "/users/0/attack_visits/0/t")


def test_attack_visit_times_strictly_increase():
    doc = base_document()
    doc["users"][0]["attack_visits"] = [
        {"site": "monads", "t": 300.0},
        {"site": "monads", "t": 300.0},
    ]
    reject(doc, "/users/0/attack_visits/1/t")


def test_attack_visits_may_target_non_attack_sites():
    doc = base_document()
    doc["users"][0]["attack_visits"] = [{"site": "kickoff", "t": 100.0}]
    scenario = load_scenario_document(doc)
    assert scenario.users[0].attack_visits[0].site == "kickoff"


def test_attack_visit_page_must_belong_to_site():
    doc = base_document()
    doc["users"][0]["attack_visits"] = [
        {"site": "monads", "t": 100.0, "page": "fixtures"}
    ]
    reject(doc, "/users/0/attack_visits/0/page")


def test_warmup_page_must_exist():
    doc = base_document()
    doc["users"][0]["warmup_plan"] = [{"page": "ghost"}]
    reject(doc, "/users/0/warmup_plan/0/page")


def test_attack_site_must_be_attacker_owned_and_logging():
    doc = base_document()
    doc["attack"]["sites"] = ["kickoff"]
    reject(doc, "/attack/sites/0")
    doc = base_document()
    doc["websites"][0]["logging"] = False
    reject(doc, "/attack/sites/0")


def test_attack_audiences_checked():
    doc = base_document()
    doc["attack"]["audiences"] = ["a_ghost"]
    reject(doc, "/attack/audiences/0")
    doc = base_document()
    doc["attack"]["audiences"] = ["a_sports", "a_sports"]
    reject(doc, "/attack/audiences")
    doc = base_document()
    doc["attack"]["audiences"] = []
    reject(doc, "/attack/audiences")


def test_attack_cpm_must_be_positive():
    doc = base_document()
    doc["attack"]["cpm"] = 0
    reject(doc, "/attack/cpm")


def test_attack_tracking_args_injective():
    doc = base_document()
    doc["attack"]["tracking_args"] = {"alice": "x1", "bob": "x1"}
    reject(doc, "/attack/tracking_args")


def test_attack_extra_placement_sites_must_exist():
    doc = base_document()
    doc["attack"]["extra_placement_sites"] = ["ghost"]
    reject(doc, "/attack/extra_placement_sites/0")


def test_profile_and_market_config_sections():
    doc = base_document()
    doc["profile_config"] = {"score_mode": "dwell", "interest_threshold": 2.0}
    doc["market_config"] = {"auction_mode": "second_price", "click_through_rate": 0.1}
    scenario = load_scenario_document(doc)
    assert scenario.profile_config.score_mode == "dwell"
    assert scenario.profile_config.interest_threshold == 2.0
    assert scenario.market_config.auction_mode == "second_price"
    assert scenario.market_config.click_through_rate == 0.1
    doc["profile_config"] = {"score_mode": "nonsense"}
    reject(doc, "/profile_config")


def test_read_scenario_file_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError) as err:
        read_scenario_file(path)
    assert "not valid JSON" in str(err.value)


def test_load_scenario_from_file(tmp_path):
    path = tmp_path / "ok.json"
    path.write_text(json.dumps(base_document()), encoding="utf-8")
    scenario = load_scenario(path)
    assert scenario.seed == 42


def test_generated_documents_always_validate():
    rng = random.Random(555)
    for _ in range(50):
        doc = random_scenario_document(rng)
        scenario = load_scenario_document(doc)
        assert scenario.horizon > 0
