#include "ihf/datafiles.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ihf::datafiles {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) return out;
        start = tab + 1;
    }
}

std::ofstream open_out(const fs::path& path, const std::string& kind, const json& header) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << "# " << kind << ' ' << header.dump() << '\n';
    return os;
}

// Reads the header and returns the record lines.
std::vector<std::vector<std::string>> read_records(const fs::path& path, const std::string& kind, std::size_t columns,
                                                   Header* header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("# " + kind + " ", 0) != 0)
        throw std::runtime_error(path.string() + ": not a " + kind + " file");
    if (header) {
        header->kind = kind;
        header->fields = json::parse(line.substr(kind.size() + 3));
    }
    std::vector<std::vector<std::string>> rows;
    for (int lineno = 2; std::getline(is, line); ++lineno) {
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != columns)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(columns) + " fields");
        rows.push_back(std::move(cells));
    }
    return rows;
}

bool parse_flag(const std::string& s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw std::runtime_error("bad flag '" + s + "'");
}

envs::Outcome parse_outcome(const std::string& s) {
    if (s == "win") return envs::Outcome::Win;
    if (s == "lose") return envs::Outcome::Lose;
    if (s == "timeout") return envs::Outcome::Timeout;
    throw std::runtime_error("bad outcome '" + s + "'");
}

}  // namespace

json game_fields(const envs::Game& game) {
    json j{{"game", std::string(envs::game_name(game.id()))}};
    if (game.id() == envs::GameId::Maze) j["map"] = game.maze_map().to_text();
    return j;
}

envs::Game game_from_header(const json& fields) {
    const auto id = envs::parse_game(fields.at("game").get<std::string>());
    if (id != envs::GameId::Maze) return envs::Game::make(id);
    return envs::Game::make(id, envs::load_maze(fields.at("map").get<std::string>()));
}

Header read_header(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw std::runtime_error(path.string() + ": no header");
    const std::size_t space = line.find(' ', 2);
    if (space == std::string::npos) throw std::runtime_error(path.string() + ": malformed header");
    return {line.substr(2, space - 2), json::parse(line.substr(space + 1))};
}

void write_trajectories(const fs::path& path, const envs::Game& game, const std::vector<envs::Trajectory>& trajs,
                        const json& header) {
    auto os = open_out(path, "trajectories", header);
    for (std::size_t i = 0; i < trajs.size(); ++i)
        for (const auto& t : trajs[i].transitions)
            os << i << '\t' << game.serialize(t.state) << '\t' << t.action.index << '\t' << real(t.reward) << '\t'
               << game.serialize(t.next_state) << '\t' << (t.terminal ? 1 : 0) << '\t'
               << envs::outcome_name(trajs[i].outcome) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<envs::Trajectory> read_trajectories(const fs::path& path, const envs::Game& game, Header* header) {
    std::vector<envs::Trajectory> out;
    for (const auto& r : read_records(path, "trajectories", 7, header)) {
        const auto idx = std::stoul(r[0]);
        if (idx == out.size()) out.emplace_back();
        if (idx + 1 != out.size()) throw std::runtime_error(path.string() + ": trajectories out of order");
        envs::Transition t{game.parse_state(r[1]), envs::ActionId{std::stoi(r[2])}, std::stod(r[3]),
                           game.parse_state(r[4]), parse_flag(r[5])};
        out.back().transitions.push_back(t);
        out.back().outcome = parse_outcome(r[6]);
    }
    return out;
}

void write_labels(const fs::path& path, const envs::Game& game, const feedback::LabeledDataset& data,
                  const json& header) {
    json h = header;
    h["source"] = data.source;
    auto os = open_out(path, "labels", h);
    for (const auto& l : data.labels)
        os << l.trajectory << '\t' << game.serialize(l.state) << '\t' << l.action.index << '\t' << (l.errp ? 1 : 0)
           << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

feedback::LabeledDataset read_labels(const fs::path& path, const envs::Game& game, Header* header) {
    Header local;
    feedback::LabeledDataset data;
    for (const auto& r : read_records(path, "labels", 4, &local))
        data.labels.push_back({game.parse_state(r[1]), envs::ActionId{std::stoi(r[2])}, parse_flag(r[3]), std::stoi(r[0])});
    if (local.fields.contains("source")) data.source = local.fields.at("source").get<std::vector<int>>();
    if (header) *header = local;
    return data;
}

void write_transitions(const fs::path& path, const envs::Game& game, const std::vector<envs::Transition>& transitions,
                       const json& header) {
    auto os = open_out(path, "transitions", header);
    for (const auto& t : transitions)
        os << game.serialize(t.state) << '\t' << t.action.index << '\t' << real(t.reward) << '\t'
           << game.serialize(t.next_state) << '\t' << (t.terminal ? 1 : 0) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<envs::Transition> read_transitions(const fs::path& path, const envs::Game& game, Header* header) {
    std::vector<envs::Transition> out;
    for (const auto& r : read_records(path, "transitions", 5, header))
        out.push_back({game.parse_state(r[0]), envs::ActionId{std::stoi(r[1])}, std::stod(r[2]), game.parse_state(r[3]),
                       parse_flag(r[4])});
    return out;
}

}  // namespace ihf::datafiles
