#include <json.hpp>

#include "fairmw/engines.hpp"
#include "fairmw/error.hpp"

namespace fairmw {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

GroupId parse_group(const std::string& s) {
    if (s == "A") return GroupId::A;
    if (s == "B") return GroupId::B;
    throw Error(ErrorKind::FormatError, "unknown group '" + s + "'");
}

Label parse_label(const json& j) {
    const int v = j.get<int>();
    if (v != 0 && v != 1) throw Error(ErrorKind::FormatError, "labels must be 0 or 1");
    return label_from_bool(v == 1);
}

}  // namespace

std::string serialize(const Trajectory& trajectory) {
    json outcomes = json::array();
    for (const auto& o : trajectory.outcomes()) {
        json q = nullptr;
        if (o.q_used) q = json::array({o.q_used->a_neg, o.q_used->b_neg, o.q_used->a_pos, o.q_used->b_pos});
        outcomes.push_back({
            {"t", o.t},
            {"group", std::string(1, group_name(o.group))},
            {"label", label_value(o.label)},
            {"table", o.table_chosen ? json(label_value(*o.table_chosen)) : json(nullptr)},
            {"expert", o.expert_chosen},
            {"prediction", label_value(o.prediction)},
            {"realized_loss", o.realized_loss},
            {"expected_loss", o.expected_loss},
            {"right_table_expected_loss", optional_number(o.right_table_expected_loss)},
            {"alpha", optional_number(o.alpha)},
            {"losses", o.per_expert_losses},
            {"q", q},
        });
    }
    const json doc = {
        {"engine", std::string(to_string(trajectory.engine()))},
        {"experts", trajectory.expert_names()},
        {"eta", trajectory.eta()},
        {"dirichlet_alpha", trajectory.dirichlet_alpha()},
        {"outcomes", outcomes},
    };
    return doc.dump() + "\n";
}

Trajectory deserialize_trajectory(std::string_view text) {
    try {
        const json doc = json::parse(text);
        Trajectory trajectory(parse_engine(doc.at("engine").get<std::string>()),
                              doc.at("experts").get<std::vector<std::string>>(), doc.at("eta").get<double>(),
                              doc.at("dirichlet_alpha").get<double>());
        for (const auto& j : doc.at("outcomes")) {
            RoundOutcome o;
            o.t = j.at("t").get<std::size_t>();
            o.group = parse_group(j.at("group").get<std::string>());
            o.label = parse_label(j.at("label"));
            if (!j.at("table").is_null()) o.table_chosen = parse_label(j.at("table"));
            o.expert_chosen = j.at("expert").get<std::size_t>();
            o.prediction = parse_label(j.at("prediction"));
            o.realized_loss = j.at("realized_loss").get<double>();
            o.expected_loss = j.at("expected_loss").get<double>();
            o.right_table_expected_loss = read_optional(j, "right_table_expected_loss");
            o.alpha = read_optional(j, "alpha");
            o.per_expert_losses = j.at("losses").get<std::vector<double>>();
            if (const auto& q = j.at("q"); !q.is_null()) {
                const auto v = q.get<std::vector<double>>();
                if (v.size() != 4) throw Error(ErrorKind::FormatError, "q must have 4 entries");
                o.q_used = QDistribution{v[0], v[1], v[2], v[3]};
            }
            trajectory.append(std::move(o));
        }
        return trajectory;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::FormatError, std::string("malformed trajectory: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::FormatError) throw;
        throw Error(ErrorKind::FormatError, e.what());
    }
}

}  // namespace fairmw
