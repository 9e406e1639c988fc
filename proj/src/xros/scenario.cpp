#include "xros/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace xros {

namespace {

std::string issues_to_message(const std::vector<ValidationIssue>& issues) {
    std::string msg = "scenario invalid:";
    for (const auto& i : issues) msg += "\n  " + i.field + ": " + i.message;
    return msg;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    if (items.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += items[i];
    }
    return out;
}

std::optional<bool> parse_bool(const std::string& v) {
    if (v == "yes" || v == "true" || v == "on" || v == "1") return true;
    if (v == "no" || v == "false" || v == "off" || v == "0") return false;
    return std::nullopt;
}

// Typed access to one whitespace-delimited table row; every failure is
// recorded against "<section>[<row>].<column>".
class Row {
public:
    Row(std::vector<std::string> cells, std::string prefix, std::vector<ValidationIssue>& issues)
        : cells_(std::move(cells)), prefix_(std::move(prefix)), issues_(issues) {}

    bool ok() const { return ok_; }

    std::string str(const char* name) {
        if (auto c = next(name)) return *c;
        return {};
    }

    double num(const char* name) {
        if (auto c = next(name)) {
            try {
                size_t pos = 0;
                double v = std::stod(*c, &pos);
                if (pos == c->size()) return v;
            } catch (...) {
            }
            fail(name, "not a number: '" + *c + "'");
        }
        return 0.0;
    }

    int64_t i64(const char* name) {
        if (auto c = next(name)) {
            try {
                size_t pos = 0;
                int64_t v = std::stoll(*c, &pos);
                if (pos == c->size()) return v;
            } catch (...) {
            }
            fail(name, "not an integer: '" + *c + "'");
        }
        return 0;
    }

    uint64_t u64(const char* name) {
        if (auto c = next(name)) {
            try {
                size_t pos = 0;
                if (!c->empty() && (*c)[0] != '-') {
                    uint64_t v = std::stoull(*c, &pos);
                    if (pos == c->size()) return v;
                }
            } catch (...) {
            }
            fail(name, "not a non-negative integer: '" + *c + "'");
        }
        return 0;
    }

    bool yesno(const char* name) {
        if (auto c = next(name)) {
            if (auto b = parse_bool(*c)) return *b;
            fail(name, "expected yes/no: '" + *c + "'");
        }
        return false;
    }

    Aabb aabb(const char* what) {
        Aabb box;
        std::string n(what);
        box.lo.x = num((n + "_lo_x").c_str());
        box.lo.y = num((n + "_lo_y").c_str());
        box.lo.z = num((n + "_lo_z").c_str());
        box.hi.x = num((n + "_hi_x").c_str());
        box.hi.y = num((n + "_hi_y").c_str());
        box.hi.z = num((n + "_hi_z").c_str());
        if (ok_ && !box.valid()) fail(what, "box lo must not exceed hi");
        return box;
    }

    void finish() {
        if (idx_ < cells_.size()) fail("row", "unexpected extra columns");
    }

    void fail(const char* name, const std::string& msg) {
        ok_ = false;
        issues_.push_back({prefix_ + "." + name, msg});
    }

private:
    std::optional<std::string> next(const char* name) {
        if (idx_ >= cells_.size()) {
            fail(name, "missing column");
            return std::nullopt;
        }
        return cells_[idx_++];
    }

    std::vector<std::string> cells_;
    std::string prefix_;
    std::vector<ValidationIssue>& issues_;
    size_t idx_ = 0;
    bool ok_ = true;
};

struct ScalarCtx {
    Scenario& s;
    std::vector<ValidationIssue>& issues;
    std::string path;

    void fail(const std::string& msg) { issues.push_back({path, msg}); }

    bool num(const std::string& v, double& out) {
        try {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos == v.size()) {
                out = d;
                return true;
            }
        } catch (...) {
        }
        fail("not a number: '" + v + "'");
        return false;
    }

    bool i64(const std::string& v, int64_t& out) {
        try {
            size_t pos = 0;
            int64_t d = std::stoll(v, &pos);
            if (pos == v.size()) {
                out = d;
                return true;
            }
        } catch (...) {
        }
        fail("not an integer: '" + v + "'");
        return false;
    }

    bool u64(const std::string& v, uint64_t& out) {
        try {
            size_t pos = 0;
            if (!v.empty() && v[0] != '-') {
                uint64_t d = std::stoull(v, &pos);
                if (pos == v.size()) {
                    out = d;
                    return true;
                }
            }
        } catch (...) {
        }
        fail("not a non-negative integer: '" + v + "'");
        return false;
    }

    bool boolean(const std::string& v, bool& out) {
        if (auto b = parse_bool(v)) {
            out = *b;
            return true;
        }
        fail("expected yes/no: '" + v + "'");
        return false;
    }

    bool intval(const std::string& v, int& out) {
        int64_t tmp;
        if (!i64(v, tmp)) return false;
        out = static_cast<int>(tmp);
        return true;
    }
};

// Shared by section parsing and --override; returns false for unknown keys.
bool set_scalar(ScalarCtx& c, const std::string& section, const std::string& key,
                const std::string& value) {
    Scenario& s = c.s;
    if (section == "sim") {
        if (key == "seed") return c.u64(value, s.seed);
        if (key == "duration_us") return c.i64(value, s.duration_us);
        if (key == "frame_rate") return c.intval(value, s.frame_rate);
        if (key == "mode") {
            if (value == "shared") s.mode = ExecMode::SharedModel;
            else if (value == "isolated") s.mode = ExecMode::IsolatedModel;
            else c.fail("mode must be shared|isolated");
            return true;
        }
        if (key == "sensor_period_us") return c.i64(value, s.sensor_period_us);
        if (key == "sensor_range_m") return c.num(value, s.sensor_range_m);
        if (key == "grid_cell_m") return c.num(value, s.grid_cell_m);
        if (key == "local_copy_budget") return c.intval(value, s.local_copy_budget);
        if (key == "initial_cell") { s.initial_cell = value; return true; }
        if (key == "initial_context") { s.initial_context = value; return true; }
        return false;
    }
    if (section == "energy") {
        if (key == "compute_mj") return c.num(value, s.compute_mj);
        if (key == "radio_mj_per_byte") return c.num(value, s.radio_mj_per_byte);
        if (key == "message_mj") return c.num(value, s.message_mj);
        return false;
    }
    if (section == "display") {
        if (key == "max_items") return c.intval(value, s.display.max_items);
        if (key == "max_solid_angle") return c.num(value, s.display.max_solid_angle);
        if (key == "coverage_grid") return c.intval(value, s.coverage_grid);
        if (key == "base_latency_us") return c.i64(value, s.display_base_latency_us);
        return false;
    }
    if (section == "frustum") {
        if (key == "hfov_deg") return c.num(value, s.hfov_deg);
        if (key == "vfov_deg") return c.num(value, s.vfov_deg);
        if (key == "near_m") return c.num(value, s.near_m);
        if (key == "far_m") return c.num(value, s.far_m);
        return false;
    }
    if (section == "scheduler") {
        if (key == "d_near_m") return c.num(value, s.sched.d_near_m);
        if (key == "rebind_base_us") return c.i64(value, s.sched.rebind_base_us);
        if (key == "rebind_per_placement_us") return c.i64(value, s.sched.rebind_per_placement_us);
        if (key == "recovery_static_mean_us") return c.num(value, s.sched.recovery_static_mean_us);
        if (key == "recovery_static_stdev_us") return c.num(value, s.sched.recovery_static_stdev_us);
        if (key == "recovery_moving_mean_us") return c.num(value, s.sched.recovery_moving_mean_us);
        if (key == "recovery_moving_stdev_us") return c.num(value, s.sched.recovery_moving_stdev_us);
        if (key == "out_of_view_penalty_us") return c.i64(value, s.sched.out_of_view_penalty_us);
        return false;
    }
    if (section == "offloading") {
        if (key == "enabled") return c.boolean(value, s.offloading_enabled);
        if (key == "migration_latency_us") return c.i64(value, s.offload.migration_latency_us);
        if (key == "battery_low_threshold") return c.num(value, s.offload.battery_low_threshold);
        if (key == "battery_remote_bias") return c.num(value, s.offload.battery_remote_bias);
        if (key == "block_k") return c.intval(value, s.block_k);
        if (key == "bytes_per_element") return c.intval(value, s.bytes_per_element);
        return false;
    }
    if (section == "device") {
        if (key == "cpu_factor") return c.num(value, s.device.cpu_factor);
        if (key == "battery_frac") return c.num(value, s.device.battery_frac);
        if (key == "storage_free_bytes") return c.i64(value, s.device.storage_free_bytes);
        if (key == "mem_free_bytes") return c.i64(value, s.device.mem_free_bytes);
        return false;
    }
    if (section == "network") {
        if (key == "type") {
            if (auto t = net_type_from(value)) s.access_network.type = *t;
            else c.fail("unknown network type '" + value + "'");
            return true;
        }
        if (key == "bandwidth_bps") return c.num(value, s.access_network.bandwidth_bps);
        if (key == "latency_us") return c.i64(value, s.access_network.latency_us);
        return false;
    }
    if (section == "user_prefs") {
        if (key == "confidential_tasks_local_only")
            return c.boolean(value, s.user_prefs.confidential_tasks_local_only);
        if (key == "data_share_ok") return c.boolean(value, s.user_prefs.data_share_ok);
        return false;
    }
    if (section == "interaction") {
        if (key == "intimate_m") return c.num(value, s.zones.intimate_m);
        if (key == "personal_m") return c.num(value, s.zones.personal_m);
        if (key == "social_m") return c.num(value, s.zones.social_m);
        if (key == "arm_length_m") return c.num(value, s.arm_length_m);
        if (key == "base_target_radius_m") return c.num(value, s.base_target_radius_m);
        if (key == "compensation") return c.boolean(value, s.compensation);
        return false;
    }
    if (section == "persistence") {
        if (key == "load") { s.persist_load = value; return true; }
        if (key == "save") { s.persist_save = value; return true; }
        return false;
    }
    if (section == "debug") {
        if (key == "inject_taint_at_us") {
            int64_t t = 0;
            if (c.i64(value, t)) s.inject_taint_at_us = t;
            return true;
        }
        return false;
    }
    return false;
}

WorldElement parse_world_row(Row& row, const std::string& source, bool with_timestamp) {
    WorldElement e;
    e.id = row.u64("id");
    std::string kind = row.str("kind");
    if (auto k = element_kind_from(kind)) e.kind = *k;
    else row.fail("kind", "unknown element kind '" + kind + "'");
    e.pose.position.x = row.num("x");
    e.pose.position.y = row.num("y");
    e.pose.position.z = row.num("z");
    e.pose.orientation = quat_from_yaw(row.num("yaw_deg") * 3.14159265358979323846 / 180.0);
    e.extent = row.aabb("extent");
    if (with_timestamp) e.timestamp = row.i64("t_us");
    std::string tag = row.str("tag");
    if (auto t = sensitivity_from(tag)) e.tag = *t;
    else row.fail("tag", "unknown tag '" + tag + "'");
    std::string labels = row.str("labels");
    if (labels != "-") e.labels = split_list(labels);
    e.source = source;
    row.finish();
    return e;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ValidationIssue> iss)
    : SimError(issues_to_message(iss)), issues(std::move(iss)) {}

Scenario load_scenario_string(const std::string& text) {
    Scenario s;
    std::vector<ValidationIssue> issues;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    std::map<std::string, int> row_counts;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        auto e = line.find_last_not_of(" \t\r");
        line = b == std::string::npos ? "" : line.substr(b, e - b + 1);
        if (line.empty()) continue;

        if (!header_seen) {
            if (line != "xros-scenario v1") {
                issues.push_back({"line 1", "expected header 'xros-scenario v1'"});
                throw ScenarioError(std::move(issues));
            }
            header_seen = true;
            continue;
        }

        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        if (section.empty()) {
            issues.push_back({"line " + std::to_string(lineno), "content before any [section]"});
            continue;
        }

        auto eq = line.find('=');
        bool is_table = section == "apps" || section == "world" || section == "placements" ||
                        section == "leases" || section == "links" || section == "servers" ||
                        section == "cells" || section == "cell_crossings" || section == "motion" ||
                        section == "tasks" || section == "context_switches" ||
                        section == "user_rules" || section == "context_rules" ||
                        section == "contexts" || section == "bystander_events" ||
                        section == "safety_objects" || section == "quality_ladder" ||
                        section == "input_events" || section == "io_candidates" ||
                        section == "remote_merges" || section.starts_with("remote_world.");

        if (!is_table) {
            if (eq == std::string::npos) {
                issues.push_back({"line " + std::to_string(lineno),
                                  "expected key = value in [" + section + "]"});
                continue;
            }
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            auto trim = [](std::string& v) {
                auto b2 = v.find_first_not_of(" \t");
                auto e2 = v.find_last_not_of(" \t");
                v = b2 == std::string::npos ? "" : v.substr(b2, e2 - b2 + 1);
            };
            trim(key);
            trim(value);
            ScalarCtx ctx{s, issues, section + "." + key};
            if (!set_scalar(ctx, section, key, value))
                issues.push_back({section + "." + key, "unknown key"});
            continue;
        }

        int idx = row_counts[section]++;
        Row row(split_ws(line), section + "[" + std::to_string(idx) + "]", issues);

        if (section == "apps") {
            ScenarioApp a;
            a.id = row.u64("id");
            a.demand_us = row.i64("demand_us");
            a.private_clearance = row.yesno("clearance");
            std::string pin = row.str("pin");
            a.pin = pin == "-" ? "" : pin;
            row.finish();
            if (row.ok()) s.apps.push_back(std::move(a));
        } else if (section == "world") {
            WorldElement e = parse_world_row(row, "seed", /*with_timestamp=*/false);
            if (row.ok()) s.world.push_back(std::move(e));
        } else if (section.starts_with("remote_world.")) {
            std::string device = section.substr(strlen("remote_world."));
            WorldElement e = parse_world_row(row, device, /*with_timestamp=*/true);
            if (row.ok()) s.remote_worlds[device].push_back(std::move(e));
        } else if (section == "placements") {
            ContentPlacement p;
            p.placement_id = row.u64("id");
            p.app = row.u64("app");
            p.anchor_id = row.u64("anchor");
            p.bounds = row.aabb("bounds");
            std::string prio = row.str("priority");
            if (auto pr = place_priority_from(prio)) p.priority = *pr;
            else row.fail("priority", "unknown priority '" + prio + "'");
            p.relevance = row.num("relevance");
            row.finish();
            if (row.ok()) s.placements.push_back(std::move(p));
        } else if (section == "leases") {
            uint64_t app = row.u64("app");
            Aabb region = row.aabb("region");
            row.finish();
            if (row.ok()) s.leases.emplace_back(app, region);
        } else if (section == "links") {
            std::string id = row.str("id");
            LinkState l;
            l.latency_us = row.i64("latency_us");
            l.bandwidth_bps = row.num("bandwidth_bps");
            l.loss_p = row.num("loss_p");
            l.jitter_us = row.i64("jitter_us");
            row.finish();
            if (row.ok()) s.links[id] = l;
        } else if (section == "servers") {
            ScenarioServer sv;
            sv.id = row.str("id");
            std::string cell = row.str("cell");
            sv.cell = cell == "-" ? "" : cell;
            sv.spec.cpu_factor = row.num("cpu_factor");
            sv.spec.load = row.num("load");
            sv.spec.mem_free_bytes = row.i64("mem_free_bytes");
            sv.link = row.str("link");
            sv.spec.cloud = row.yesno("cloud");
            row.finish();
            if (row.ok()) s.servers.push_back(std::move(sv));
        } else if (section == "cells") {
            std::string id = row.str("id");
            row.finish();
            if (row.ok()) s.cells.push_back(id);
        } else if (section == "cell_crossings") {
            CellCrossing cc;
            cc.time_us = row.i64("time_us");
            cc.cell = row.str("cell");
            row.finish();
            if (row.ok()) s.crossings.push_back(std::move(cc));
        } else if (section == "motion") {
            MotionSample m;
            m.time_us = row.i64("time_us");
            m.position.x = row.num("x");
            m.position.y = row.num("y");
            m.position.z = row.num("z");
            m.yaw_deg = row.num("yaw_deg");
            row.finish();
            if (row.ok()) s.motion.push_back(m);
        } else if (section == "tasks") {
            ScenarioTask t;
            t.time_us = row.i64("time_us");
            t.app = row.u64("app");
            t.spec.exec_us_local = row.i64("work_us");
            t.spec.payload_bytes = row.i64("payload_b");
            t.spec.result_bytes = row.i64("result_b");
            t.spec.deadline_us = row.i64("deadline_us");
            t.spec.confidential = row.yesno("confidential");
            std::string pin = row.str("pin");
            t.pin = pin == "-" ? "" : pin;
            std::string kind = row.str("kind");
            if (kind == "generic") t.kind = TaskKind::Generic;
            else if (kind == "recognition") t.kind = TaskKind::Recognition;
            else row.fail("kind", "unknown task kind '" + kind + "'");
            std::string target = row.str("target");
            if (target != "-") {
                try {
                    t.target = std::stoull(target);
                } catch (...) {
                    row.fail("target", "not an element id: '" + target + "'");
                }
            }
            row.finish();
            if (row.ok()) s.tasks.push_back(std::move(t));
        } else if (section == "context_switches") {
            ScenarioSwitch sw;
            sw.time_us = row.i64("time_us");
            sw.from = row.u64("from");
            sw.to = row.u64("to");
            row.finish();
            if (row.ok()) s.switches.push_back(sw);
        } else if (section == "user_rules") {
            UserRule r;
            r.match = row.str("match");
            std::string action = row.str("action");
            if (auto a = rule_action_from(action)) r.action = *a;
            else row.fail("action", "unknown action '" + action + "'");
            row.finish();
            if (row.ok()) s.user_rules.push_back(std::move(r));
        } else if (section == "context_rules") {
            ContextRule r;
            r.context = row.str("context");
            std::string suppress = row.str("suppress");
            for (const auto& cls : split_list(suppress)) {
                if (auto pr = place_priority_from(cls)) r.suppress.insert(*pr);
                else row.fail("suppress", "unknown class '" + cls + "'");
            }
            row.finish();
            if (row.ok()) s.context_rules.push_back(std::move(r));
        } else if (section == "contexts") {
            ContextChange cc;
            cc.time_us = row.i64("time_us");
            cc.context = row.str("context");
            row.finish();
            if (row.ok()) s.contexts.push_back(std::move(cc));
        } else if (section == "bystander_events") {
            BystanderEvent bv;
            bv.start_us = row.i64("start_us");
            bv.end_us = row.i64("end_us");
            bv.region = row.aabb("region");
            row.finish();
            if (row.ok()) s.bystander_events.push_back(bv);
        } else if (section == "safety_objects") {
            Aabb box = row.aabb("box");
            row.finish();
            if (row.ok()) s.safety_objects.push_back(box);
        } else if (section == "quality_ladder") {
            double bps = row.num("bitrate_bps");
            row.finish();
            if (row.ok()) s.quality_ladder.push_back(bps);
        } else if (section == "input_events") {
            InputEvent ev;
            ev.time_us = row.i64("time_us");
            ev.ray.origin.x = row.num("ox");
            ev.ray.origin.y = row.num("oy");
            ev.ray.origin.z = row.num("oz");
            ev.ray.dir.x = row.num("dx");
            ev.ray.dir.y = row.num("dy");
            ev.ray.dir.z = row.num("dz");
            row.finish();
            if (row.ok()) s.input_events.push_back(ev);
        } else if (section == "io_candidates") {
            IoRole role;
            role.element = row.u64("element");
            std::string roles = row.str("roles");
            for (const auto& r : split_list(roles)) {
                if (r == "input") role.input = true;
                else if (r == "output") role.output = true;
                else row.fail("roles", "unknown role '" + r + "'");
            }
            row.finish();
            if (row.ok()) s.io_roles.push_back(role);
        } else if (section == "remote_merges") {
            RemoteMerge rm;
            rm.time_us = row.i64("time_us");
            rm.device = row.str("device");
            row.finish();
            if (row.ok()) s.remote_merges.push_back(std::move(rm));
        }
    }

    if (!header_seen) {
        issues.push_back({"line 1", "empty scenario, expected header 'xros-scenario v1'"});
        throw ScenarioError(std::move(issues));
    }
    if (!issues.empty()) throw ScenarioError(std::move(issues));

    auto validation = validate_scenario(s);
    if (!validation.empty()) throw ScenarioError(std::move(validation));
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError({{path, "cannot open file"}});
    std::ostringstream buf;
    buf << f.rdbuf();
    return load_scenario_string(buf.str());
}

void apply_override(Scenario& s, const std::string& key, const std::string& value) {
    auto dot = key.find('.');
    std::vector<ValidationIssue> issues;
    if (dot == std::string::npos || dot == 0 || dot + 1 >= key.size()) {
        throw ScenarioError({{key, "override key must look like section.key"}});
    }
    ScalarCtx ctx{s, issues, key};
    if (!set_scalar(ctx, key.substr(0, dot), key.substr(dot + 1), value))
        issues.push_back({key, "unknown override key"});
    if (!issues.empty()) throw ScenarioError(std::move(issues));
}

std::vector<ValidationIssue> validate_scenario(const Scenario& s) {
    std::vector<ValidationIssue> issues;
    auto bad = [&](std::string field, std::string msg) {
        issues.push_back({std::move(field), std::move(msg)});
    };

    if (s.duration_us <= 0) bad("sim.duration_us", "must be positive");
    if (s.frame_rate != 30 && s.frame_rate != 60) bad("sim.frame_rate", "must be 30 or 60");
    if (s.sensor_period_us <= 0) bad("sim.sensor_period_us", "must be positive");
    if (s.sensor_range_m <= 0) bad("sim.sensor_range_m", "must be positive");
    if (s.grid_cell_m <= 0) bad("sim.grid_cell_m", "must be positive");
    if (s.local_copy_budget < 0) bad("sim.local_copy_budget", "must be >= 0");
    if (s.compute_mj < 0 || s.radio_mj_per_byte < 0 || s.message_mj < 0)
        bad("energy", "costs must be >= 0");
    if (s.display.max_items < 1) bad("display.max_items", "must be >= 1");
    if (!(s.display.max_solid_angle > 0 && s.display.max_solid_angle <= 1))
        bad("display.max_solid_angle", "must be in (0, 1]");
    if (s.coverage_grid < 2) bad("display.coverage_grid", "must be >= 2");
    if (!(s.hfov_deg > 0 && s.hfov_deg < 180)) bad("frustum.hfov_deg", "must be in (0, 180)");
    if (!(s.vfov_deg > 0 && s.vfov_deg < 180)) bad("frustum.vfov_deg", "must be in (0, 180)");
    if (!(s.near_m > 0 && s.near_m < s.far_m)) bad("frustum.near_m", "need 0 < near < far");
    if (s.sched.d_near_m <= 0) bad("scheduler.d_near_m", "must be positive");
    if (s.device.cpu_factor <= 0) bad("device.cpu_factor", "must be positive");
    if (!(s.device.battery_frac >= 0 && s.device.battery_frac <= 1))
        bad("device.battery_frac", "must be in [0, 1]");
    if (s.access_network.bandwidth_bps <= 0) bad("network.bandwidth_bps", "must be positive");
    if (s.access_network.latency_us < 0) bad("network.latency_us", "must be >= 0");
    if (!(s.zones.intimate_m < s.zones.personal_m && s.zones.personal_m < s.zones.social_m))
        bad("interaction", "zone thresholds must be strictly increasing");
    if (s.block_k < 1) bad("offloading.block_k", "must be >= 1");
    if (s.bytes_per_element < 1) bad("offloading.bytes_per_element", "must be >= 1");

    std::set<uint64_t> app_ids;
    for (size_t i = 0; i < s.apps.size(); ++i) {
        const auto& a = s.apps[i];
        std::string p = "apps[" + std::to_string(i) + "]";
        if (!app_ids.insert(a.id).second) bad(p + ".id", "duplicate app id");
        if (a.demand_us <= 0) bad(p + ".demand_us", "must be positive");
    }

    std::set<std::string> link_ids;
    for (const auto& [id, l] : s.links) {
        std::string p = "links[" + id + "]";
        link_ids.insert(id);
        if (l.bandwidth_bps <= 0) bad(p + ".bandwidth_bps", "must be positive");
        if (!(l.loss_p >= 0 && l.loss_p < 1)) bad(p + ".loss_p", "must be in [0, 1)");
        if (l.latency_us < 0) bad(p + ".latency_us", "must be >= 0");
        if (l.jitter_us < 0) bad(p + ".jitter_us", "must be >= 0");
    }

    std::set<std::string> server_ids;
    std::set<std::string> cell_ids(s.cells.begin(), s.cells.end());
    for (size_t i = 0; i < s.servers.size(); ++i) {
        const auto& sv = s.servers[i];
        std::string p = "servers[" + std::to_string(i) + "]";
        if (!server_ids.insert(sv.id).second) bad(p + ".id", "duplicate server id");
        if (sv.spec.cpu_factor <= 0) bad(p + ".cpu_factor", "must be positive");
        if (!(sv.spec.load >= 0 && sv.spec.load < 1)) bad(p + ".load", "must be in [0, 1)");
        if (!link_ids.count(sv.link)) bad(p + ".link", "unknown link '" + sv.link + "'");
        if (!sv.cell.empty()) cell_ids.insert(sv.cell);  // servers implicitly declare their cell
    }

    for (size_t i = 0; i < s.apps.size(); ++i) {
        const auto& a = s.apps[i];
        if (!a.pin.empty() && a.pin != "local" && !server_ids.count(a.pin))
            bad("apps[" + std::to_string(i) + "].pin", "unknown server '" + a.pin + "'");
    }

    std::set<uint64_t> element_ids;
    std::set<uint64_t> anchor_ids;
    for (size_t i = 0; i < s.world.size(); ++i) {
        const auto& e = s.world[i];
        std::string p = "world[" + std::to_string(i) + "]";
        if (!element_ids.insert(e.id).second) bad(p + ".id", "duplicate element id");
        if (e.kind == ElementKind::Anchor) anchor_ids.insert(e.id);
        if (e.tag == Sensitivity::Bystander)
            bad(p + ".tag", "seed elements cannot carry the bystander tag");
        if (!e.extent.valid()) bad(p + ".extent", "box lo must not exceed hi");
    }
    for (const auto& [device, elems] : s.remote_worlds) {
        for (size_t i = 0; i < elems.size(); ++i) {
            if (elems[i].tag == Sensitivity::Bystander)
                bad("remote_world." + device + "[" + std::to_string(i) + "].tag",
                    "remote elements cannot carry the bystander tag");
        }
    }

    std::set<uint64_t> placement_ids;
    for (size_t i = 0; i < s.placements.size(); ++i) {
        const auto& pl = s.placements[i];
        std::string p = "placements[" + std::to_string(i) + "]";
        if (!placement_ids.insert(pl.placement_id).second) bad(p + ".id", "duplicate placement id");
        if (!app_ids.count(pl.app)) bad(p + ".app", "unknown app");
        if (!anchor_ids.count(pl.anchor_id)) bad(p + ".anchor", "no anchor with this id");
        if (!(pl.relevance >= 0 && pl.relevance <= 1)) bad(p + ".relevance", "must be in [0, 1]");
    }

    for (size_t i = 0; i < s.leases.size(); ++i) {
        if (!app_ids.count(s.leases[i].first))
            bad("leases[" + std::to_string(i) + "].app", "unknown app");
    }

    if (!s.initial_cell.empty() && !cell_ids.count(s.initial_cell))
        bad("sim.initial_cell", "unknown cell '" + s.initial_cell + "'");

    for (size_t i = 0; i < s.crossings.size(); ++i) {
        const auto& cc = s.crossings[i];
        std::string p = "cell_crossings[" + std::to_string(i) + "]";
        if (!cell_ids.count(cc.cell)) bad(p + ".cell", "unknown cell '" + cc.cell + "'");
        if (i > 0 && cc.time_us < s.crossings[i - 1].time_us) bad(p + ".time_us", "not sorted");
    }

    for (size_t i = 0; i < s.motion.size(); ++i) {
        if (i > 0 && s.motion[i].time_us <= s.motion[i - 1].time_us)
            bad("motion[" + std::to_string(i) + "].time_us", "trace must be strictly increasing");
    }
    for (size_t i = 1; i < s.contexts.size(); ++i) {
        if (s.contexts[i].time_us < s.contexts[i - 1].time_us)
            bad("contexts[" + std::to_string(i) + "].time_us", "not sorted");
    }
    for (size_t i = 1; i < s.input_events.size(); ++i) {
        if (s.input_events[i].time_us < s.input_events[i - 1].time_us)
            bad("input_events[" + std::to_string(i) + "].time_us", "not sorted");
    }

    for (size_t i = 0; i < s.tasks.size(); ++i) {
        const auto& t = s.tasks[i];
        std::string p = "tasks[" + std::to_string(i) + "]";
        if (!app_ids.count(t.app)) bad(p + ".app", "unknown app");
        if (t.spec.exec_us_local <= 0) bad(p + ".work_us", "must be positive");
        if (t.spec.payload_bytes < 0 || t.spec.result_bytes < 0)
            bad(p + ".payload_b", "must be >= 0");
        if (t.spec.deadline_us < 0) bad(p + ".deadline_us", "must be >= 0");
        if (!t.pin.empty() && t.pin != "local" && !server_ids.count(t.pin))
            bad(p + ".pin", "unknown server '" + t.pin + "'");
        if (t.kind == TaskKind::Recognition && !element_ids.count(t.target))
            bad(p + ".target", "recognition target not in world");
        if (t.time_us < 0) bad(p + ".time_us", "must be >= 0");
    }

    for (size_t i = 0; i < s.switches.size(); ++i) {
        const auto& sw = s.switches[i];
        std::string p = "context_switches[" + std::to_string(i) + "]";
        if (!app_ids.count(sw.from)) bad(p + ".from", "unknown app");
        if (!app_ids.count(sw.to)) bad(p + ".to", "unknown app");
        if (sw.from == sw.to) bad(p + ".to", "switch requires two distinct apps");
    }

    for (size_t i = 0; i < s.user_rules.size(); ++i) {
        const auto& r = s.user_rules[i];
        std::string p = "user_rules[" + std::to_string(i) + "]";
        if (r.match.starts_with("tag:")) {
            if (!sensitivity_from(r.match.substr(4))) bad(p + ".match", "unknown tag");
        } else if (!r.match.starts_with("label:")) {
            bad(p + ".match", "match must be tag:<tag> or label:<label>");
        }
    }
    for (size_t i = 0; i < s.context_rules.size(); ++i) {
        if (s.context_rules[i].suppress.count(PlacePriority::Safety))
            bad("context_rules[" + std::to_string(i) + "].suppress",
                "safety placements cannot be suppressed");
    }

    for (size_t i = 0; i < s.bystander_events.size(); ++i) {
        const auto& bv = s.bystander_events[i];
        std::string p = "bystander_events[" + std::to_string(i) + "]";
        if (bv.end_us <= bv.start_us) bad(p + ".end_us", "must be after start_us");
    }

    for (size_t i = 1; i < s.quality_ladder.size(); ++i) {
        if (s.quality_ladder[i] < s.quality_ladder[i - 1])
            bad("quality_ladder[" + std::to_string(i) + "]", "must be sorted ascending");
    }
    for (size_t i = 0; i < s.quality_ladder.size(); ++i) {
        if (s.quality_ladder[i] <= 0)
            bad("quality_ladder[" + std::to_string(i) + "]", "must be positive");
    }

    for (size_t i = 0; i < s.io_roles.size(); ++i) {
        const auto& r = s.io_roles[i];
        std::string p = "io_candidates[" + std::to_string(i) + "]";
        if (!element_ids.count(r.element)) bad(p + ".element", "unknown element");
        if (!r.input && !r.output) bad(p + ".roles", "at least one role required");
    }

    for (size_t i = 0; i < s.remote_merges.size(); ++i) {
        const auto& rm = s.remote_merges[i];
        std::string p = "remote_merges[" + std::to_string(i) + "]";
        if (!s.remote_worlds.count(rm.device)) bad(p + ".device", "no remote_world." + rm.device);
        if (!s.links.count(rm.device) && s.links.empty())
            bad(p + ".device", "remote merges need at least one link");
    }
    if (s.inject_taint_at_us && *s.inject_taint_at_us < 0)
        bad("debug.inject_taint_at_us", "must be >= 0");

    return issues;
}

namespace {
std::string world_row(const WorldElement& e, bool with_timestamp) {
    // recover yaw from the quaternion (scenario orientation is yaw-only)
    double yaw = std::atan2(2.0 * (e.pose.orientation.w * e.pose.orientation.z),
                            1.0 - 2.0 * (e.pose.orientation.z * e.pose.orientation.z)) *
                 180.0 / 3.14159265358979323846;
    std::ostringstream os;
    os << e.id << ' ' << to_string(e.kind) << ' ' << fmt(e.pose.position.x) << ' '
       << fmt(e.pose.position.y) << ' ' << fmt(e.pose.position.z) << ' ' << fmt(yaw) << ' '
       << fmt(e.extent.lo.x) << ' ' << fmt(e.extent.lo.y) << ' ' << fmt(e.extent.lo.z) << ' '
       << fmt(e.extent.hi.x) << ' ' << fmt(e.extent.hi.y) << ' ' << fmt(e.extent.hi.z);
    if (with_timestamp) os << ' ' << e.timestamp;
    os << ' ' << to_string(e.tag) << ' ' << join_list(e.labels);
    return os.str();
}

std::string aabb_cols(const Aabb& b) {
    std::ostringstream os;
    os << fmt(b.lo.x) << ' ' << fmt(b.lo.y) << ' ' << fmt(b.lo.z) << ' ' << fmt(b.hi.x) << ' '
       << fmt(b.hi.y) << ' ' << fmt(b.hi.z);
    return os.str();
}
}  // namespace

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "xros-scenario v1\n\n";
    os << "[sim]\n";
    os << "seed = " << s.seed << "\n";
    os << "duration_us = " << s.duration_us << "\n";
    os << "frame_rate = " << s.frame_rate << "\n";
    os << "mode = " << (s.mode == ExecMode::SharedModel ? "shared" : "isolated") << "\n";
    os << "sensor_period_us = " << s.sensor_period_us << "\n";
    os << "sensor_range_m = " << fmt(s.sensor_range_m) << "\n";
    os << "grid_cell_m = " << fmt(s.grid_cell_m) << "\n";
    os << "local_copy_budget = " << s.local_copy_budget << "\n";
    if (!s.initial_cell.empty()) os << "initial_cell = " << s.initial_cell << "\n";
    os << "initial_context = " << s.initial_context << "\n";

    os << "\n[energy]\n";
    os << "compute_mj = " << fmt(s.compute_mj) << "\n";
    os << "radio_mj_per_byte = " << fmt(s.radio_mj_per_byte) << "\n";
    os << "message_mj = " << fmt(s.message_mj) << "\n";

    os << "\n[display]\n";
    os << "max_items = " << s.display.max_items << "\n";
    os << "max_solid_angle = " << fmt(s.display.max_solid_angle) << "\n";
    os << "coverage_grid = " << s.coverage_grid << "\n";
    os << "base_latency_us = " << s.display_base_latency_us << "\n";

    os << "\n[frustum]\n";
    os << "hfov_deg = " << fmt(s.hfov_deg) << "\n";
    os << "vfov_deg = " << fmt(s.vfov_deg) << "\n";
    os << "near_m = " << fmt(s.near_m) << "\n";
    os << "far_m = " << fmt(s.far_m) << "\n";

    os << "\n[scheduler]\n";
    os << "d_near_m = " << fmt(s.sched.d_near_m) << "\n";
    os << "rebind_base_us = " << s.sched.rebind_base_us << "\n";
    os << "rebind_per_placement_us = " << s.sched.rebind_per_placement_us << "\n";
    os << "recovery_static_mean_us = " << fmt(s.sched.recovery_static_mean_us) << "\n";
    os << "recovery_static_stdev_us = " << fmt(s.sched.recovery_static_stdev_us) << "\n";
    os << "recovery_moving_mean_us = " << fmt(s.sched.recovery_moving_mean_us) << "\n";
    os << "recovery_moving_stdev_us = " << fmt(s.sched.recovery_moving_stdev_us) << "\n";
    os << "out_of_view_penalty_us = " << s.sched.out_of_view_penalty_us << "\n";

    os << "\n[offloading]\n";
    os << "enabled = " << (s.offloading_enabled ? "yes" : "no") << "\n";
    os << "migration_latency_us = " << s.offload.migration_latency_us << "\n";
    os << "battery_low_threshold = " << fmt(s.offload.battery_low_threshold) << "\n";
    os << "battery_remote_bias = " << fmt(s.offload.battery_remote_bias) << "\n";
    os << "block_k = " << s.block_k << "\n";
    os << "bytes_per_element = " << s.bytes_per_element << "\n";

    os << "\n[device]\n";
    os << "cpu_factor = " << fmt(s.device.cpu_factor) << "\n";
    os << "battery_frac = " << fmt(s.device.battery_frac) << "\n";
    os << "storage_free_bytes = " << s.device.storage_free_bytes << "\n";
    os << "mem_free_bytes = " << s.device.mem_free_bytes << "\n";

    os << "\n[network]\n";
    os << "type = " << to_string(s.access_network.type) << "\n";
    os << "bandwidth_bps = " << fmt(s.access_network.bandwidth_bps) << "\n";
    os << "latency_us = " << s.access_network.latency_us << "\n";

    os << "\n[user_prefs]\n";
    os << "confidential_tasks_local_only = "
       << (s.user_prefs.confidential_tasks_local_only ? "yes" : "no") << "\n";
    os << "data_share_ok = " << (s.user_prefs.data_share_ok ? "yes" : "no") << "\n";

    os << "\n[interaction]\n";
    os << "intimate_m = " << fmt(s.zones.intimate_m) << "\n";
    os << "personal_m = " << fmt(s.zones.personal_m) << "\n";
    os << "social_m = " << fmt(s.zones.social_m) << "\n";
    os << "arm_length_m = " << fmt(s.arm_length_m) << "\n";
    os << "base_target_radius_m = " << fmt(s.base_target_radius_m) << "\n";
    os << "compensation = " << (s.compensation ? "yes" : "no") << "\n";

    if (!s.persist_load.empty() || !s.persist_save.empty()) {
        os << "\n[persistence]\n";
        if (!s.persist_load.empty()) os << "load = " << s.persist_load << "\n";
        if (!s.persist_save.empty()) os << "save = " << s.persist_save << "\n";
    }
    if (s.inject_taint_at_us) {
        os << "\n[debug]\n";
        os << "inject_taint_at_us = " << *s.inject_taint_at_us << "\n";
    }

    if (!s.apps.empty()) {
        os << "\n[apps]\n# id demand_us clearance pin\n";
        for (const auto& a : s.apps)
            os << a.id << ' ' << a.demand_us << ' ' << (a.private_clearance ? "yes" : "no") << ' '
               << (a.pin.empty() ? "-" : a.pin) << "\n";
    }
    if (!s.world.empty()) {
        os << "\n[world]\n# id kind x y z yaw_deg lo_x lo_y lo_z hi_x hi_y hi_z tag labels\n";
        for (const auto& e : s.world) os << world_row(e, false) << "\n";
    }
    if (!s.placements.empty()) {
        os << "\n[placements]\n# id app anchor lo_x lo_y lo_z hi_x hi_y hi_z priority relevance\n";
        for (const auto& p : s.placements)
            os << p.placement_id << ' ' << p.app << ' ' << p.anchor_id << ' ' << aabb_cols(p.bounds)
               << ' ' << to_string(p.priority) << ' ' << fmt(p.relevance) << "\n";
    }
    if (!s.leases.empty()) {
        os << "\n[leases]\n# app lo_x lo_y lo_z hi_x hi_y hi_z\n";
        for (const auto& [app, region] : s.leases) os << app << ' ' << aabb_cols(region) << "\n";
    }
    if (!s.links.empty()) {
        os << "\n[links]\n# id latency_us bandwidth_bps loss_p jitter_us\n";
        for (const auto& [id, l] : s.links)
            os << id << ' ' << l.latency_us << ' ' << fmt(l.bandwidth_bps) << ' ' << fmt(l.loss_p)
               << ' ' << l.jitter_us << "\n";
    }
    if (!s.servers.empty()) {
        os << "\n[servers]\n# id cell cpu_factor load mem_free_bytes link cloud\n";
        for (const auto& sv : s.servers)
            os << sv.id << ' ' << (sv.cell.empty() ? "-" : sv.cell) << ' ' << fmt(sv.spec.cpu_factor)
               << ' ' << fmt(sv.spec.load) << ' ' << sv.spec.mem_free_bytes << ' ' << sv.link << ' '
               << (sv.spec.cloud ? "yes" : "no") << "\n";
    }
    if (!s.cells.empty()) {
        os << "\n[cells]\n";
        for (const auto& c : s.cells) os << c << "\n";
    }
    if (!s.crossings.empty()) {
        os << "\n[cell_crossings]\n# time_us cell\n";
        for (const auto& cc : s.crossings) os << cc.time_us << ' ' << cc.cell << "\n";
    }
    if (!s.motion.empty()) {
        os << "\n[motion]\n# time_us x y z yaw_deg\n";
        for (const auto& m : s.motion)
            os << m.time_us << ' ' << fmt(m.position.x) << ' ' << fmt(m.position.y) << ' '
               << fmt(m.position.z) << ' ' << fmt(m.yaw_deg) << "\n";
    }
    if (!s.tasks.empty()) {
        os << "\n[tasks]\n# time_us app work_us payload_b result_b deadline_us confidential pin "
              "kind target\n";
        for (const auto& t : s.tasks)
            os << t.time_us << ' ' << t.app << ' ' << t.spec.exec_us_local << ' '
               << t.spec.payload_bytes << ' ' << t.spec.result_bytes << ' ' << t.spec.deadline_us
               << ' ' << (t.spec.confidential ? "yes" : "no") << ' '
               << (t.pin.empty() ? "-" : t.pin) << ' '
               << (t.kind == TaskKind::Generic ? "generic" : "recognition") << ' '
               << (t.kind == TaskKind::Recognition ? std::to_string(t.target) : "-") << "\n";
    }
    if (!s.switches.empty()) {
        os << "\n[context_switches]\n# time_us from to\n";
        for (const auto& sw : s.switches)
            os << sw.time_us << ' ' << sw.from << ' ' << sw.to << "\n";
    }
    if (!s.user_rules.empty()) {
        os << "\n[user_rules]\n# match action\n";
        for (const auto& r : s.user_rules) os << r.match << ' ' << to_string(r.action) << "\n";
    }
    if (!s.context_rules.empty()) {
        os << "\n[context_rules]\n# context suppress\n";
        for (const auto& r : s.context_rules) {
            std::vector<std::string> classes;
            for (auto pr : r.suppress) classes.push_back(to_string(pr));
            os << r.context << ' ' << join_list(classes) << "\n";
        }
    }
    if (!s.contexts.empty()) {
        os << "\n[contexts]\n# time_us context\n";
        for (const auto& cc : s.contexts) os << cc.time_us << ' ' << cc.context << "\n";
    }
    if (!s.bystander_events.empty()) {
        os << "\n[bystander_events]\n# start_us end_us lo_x lo_y lo_z hi_x hi_y hi_z\n";
        for (const auto& bv : s.bystander_events)
            os << bv.start_us << ' ' << bv.end_us << ' ' << aabb_cols(bv.region) << "\n";
    }
    if (!s.safety_objects.empty()) {
        os << "\n[safety_objects]\n# lo_x lo_y lo_z hi_x hi_y hi_z\n";
        for (const auto& box : s.safety_objects) os << aabb_cols(box) << "\n";
    }
    if (!s.quality_ladder.empty()) {
        os << "\n[quality_ladder]\n# bitrate_bps\n";
        for (double bps : s.quality_ladder) os << fmt(bps) << "\n";
    }
    if (!s.input_events.empty()) {
        os << "\n[input_events]\n# time_us ox oy oz dx dy dz\n";
        for (const auto& ev : s.input_events)
            os << ev.time_us << ' ' << fmt(ev.ray.origin.x) << ' ' << fmt(ev.ray.origin.y) << ' '
               << fmt(ev.ray.origin.z) << ' ' << fmt(ev.ray.dir.x) << ' ' << fmt(ev.ray.dir.y)
               << ' ' << fmt(ev.ray.dir.z) << "\n";
    }
    if (!s.io_roles.empty()) {
        os << "\n[io_candidates]\n# element roles\n";
        for (const auto& r : s.io_roles) {
            std::vector<std::string> roles;
            if (r.input) roles.push_back("input");
            if (r.output) roles.push_back("output");
            os << r.element << ' ' << join_list(roles) << "\n";
        }
    }
    for (const auto& [device, elems] : s.remote_worlds) {
        os << "\n[remote_world." << device
           << "]\n# id kind x y z yaw_deg lo_x lo_y lo_z hi_x hi_y hi_z t_us tag labels\n";
        for (const auto& e : elems) os << world_row(e, true) << "\n";
    }
    if (!s.remote_merges.empty()) {
        os << "\n[remote_merges]\n# time_us device\n";
        for (const auto& rm : s.remote_merges) os << rm.time_us << ' ' << rm.device << "\n";
    }
    return os.str();
}

}  // namespace xros
