#include "sgf/operators.hpp"

#include "sgf/analysis.hpp"
#include "sgf/database.hpp"
#include "sgf/encoding.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"

#include <algorithm>
#include <map>

namespace sgf {

std::vector<std::string> SemiJoinEquation::key() const { return join_key(guard, cond); }

FormulaPtr Formula::var(std::size_t index) { return FormulaPtr(new Formula(Kind::Var, index, nullptr, nullptr)); }
FormulaPtr Formula::negate(FormulaPtr child) { return FormulaPtr(new Formula(Kind::Not, 0, std::move(child), nullptr)); }
FormulaPtr Formula::conj(FormulaPtr lhs, FormulaPtr rhs) {
    return FormulaPtr(new Formula(Kind::And, 0, std::move(lhs), std::move(rhs)));
}
FormulaPtr Formula::disj(FormulaPtr lhs, FormulaPtr rhs) {
    return FormulaPtr(new Formula(Kind::Or, 0, std::move(lhs), std::move(rhs)));
}

bool Formula::evaluate(const std::function<bool(std::size_t)>& value) const {
    switch (kind_) {
    case Kind::Var: return value(index_);
    case Kind::Not: return !lhs_->evaluate(value);
    case Kind::And: return lhs_->evaluate(value) && rhs_->evaluate(value);
    case Kind::Or: return lhs_->evaluate(value) || rhs_->evaluate(value);
    }
    return false;
}

std::set<std::size_t> Formula::variables() const {
    std::set<std::size_t> out;
    std::function<void(const Formula&)> walk = [&](const Formula& f) {
        if (f.kind_ == Kind::Var)
            out.insert(f.index_);
        if (f.lhs_)
            walk(*f.lhs_);
        if (f.rhs_)
            walk(*f.rhs_);
    };
    walk(*this);
    return out;
}

std::string Formula::to_string(const std::vector<std::string>& names) const {
    auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "X" + std::to_string(i + 1); };
    auto wrap = [&](const FormulaPtr& f) {
        std::string s = f->to_string(names);
        return f->kind() == Kind::Var || f->kind() == Kind::Not ? s : "(" + s + ")";
    };
    switch (kind_) {
    case Kind::Var: return name(index_);
    case Kind::Not: return "NOT " + wrap(lhs_);
    case Kind::And: return wrap(lhs_) + " AND " + wrap(rhs_);
    case Kind::Or: return wrap(lhs_) + " OR " + wrap(rhs_);
    }
    return {};
}

FormulaPtr formula_from(const ConditionPtr& c, const std::vector<Atom>& atoms) {
    switch (c->kind()) {
    case Condition::Kind::And: return Formula::conj(formula_from(c->lhs(), atoms), formula_from(c->rhs(), atoms));
    case Condition::Kind::Or: return Formula::disj(formula_from(c->lhs(), atoms), formula_from(c->rhs(), atoms));
    case Condition::Kind::Not: return Formula::negate(formula_from(c->child(), atoms));
    case Condition::Kind::Leaf: break;
    }
    auto it = std::find(atoms.begin(), atoms.end(), c->atom());
    if (it == atoms.end())
        throw Error(ErrorCode::InvalidPlan, "atom " + pretty_print(c->atom()) + " has no semi-join equation");
    return Formula::var(static_cast<std::size_t>(it - atoms.begin()));
}

namespace {

std::size_t input_slot(std::vector<JobInput>& inputs, const std::string& rel, const std::string& role) {
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].relation == rel) {
            if (inputs[i].role.find(role) == std::string::npos)
                inputs[i].role += "+" + role;
            return i;
        }
    inputs.push_back({rel, role});
    return inputs.size() - 1;
}

// Conditional atoms accepting the same facts and keyed on the same positions
// produce identical asserts and share one id.
struct AssertSource {
    AtomPattern pattern;
    std::vector<std::size_t> key_pos;
    std::size_t input = 0;
};

std::size_t assert_slot(std::vector<AssertSource>& table, std::vector<std::string>& sigs, const Atom& cond,
                        const std::vector<std::string>& key, std::size_t input) {
    AtomPattern p(cond);
    std::vector<std::size_t> pos = p.positions(key);
    std::string sig = p.signature() + "#";
    for (auto k : pos)
        sig += std::to_string(k) + ",";
    auto it = std::find(sigs.begin(), sigs.end(), sig);
    if (it != sigs.end())
        return static_cast<std::size_t>(it - sigs.begin());
    sigs.push_back(sig);
    table.push_back({std::move(p), std::move(pos), input});
    return table.size() - 1;
}

struct Requester {
    AtomPattern pattern;
    std::vector<std::size_t> key_pos;
    std::vector<std::size_t> out_pos;
    std::size_t assert_id = 0;
    std::size_t input = 0;
    bool anti = false;
};

// Messages of one fact, grouped by key in first-appearance order.
struct FactMessages {
    std::vector<std::pair<std::string, std::vector<RequestEntry>>> requests;
    std::vector<std::pair<std::string, std::vector<std::uint64_t>>> asserts;

    template <class T>
    static std::vector<T>& slot(std::vector<std::pair<std::string, std::vector<T>>>& v, const std::string& key) {
        for (auto& [k, entries] : v)
            if (k == key)
                return entries;
        v.emplace_back(key, std::vector<T>{});
        return v.back().second;
    }

    void request(const std::string& key, RequestEntry e) {
        auto& entries = slot(requests, key);
        if (std::find(entries.begin(), entries.end(), e) == entries.end())
            entries.push_back(std::move(e));
    }
    void assert_(const std::string& key, std::uint64_t id) {
        auto& entries = slot(asserts, key);
        if (std::find(entries.begin(), entries.end(), id) == entries.end())
            entries.push_back(id);
    }

    void flush(MapEmitter& em, bool packing) {
        for (auto& [key, entries] : requests) {
            if (packing) {
                em.emit(key, encode_requests(entries));
            } else {
                for (const auto& e : entries)
                    em.emit(key, encode_request(e.equation, e.payload));
            }
        }
        for (auto& [key, ids] : asserts) {
            if (packing) {
                em.emit(key, encode_asserts(ids));
            } else {
                for (auto id : ids)
                    em.emit(key, encode_assert(id));
            }
        }
    }
};

double tuple_id_bytes(const std::string& id) { return static_cast<double>(id.size() + 1); }

} // namespace

JobSpec build_msj_job(const std::string& id, const std::vector<SemiJoinEquation>& eqs, const OperatorConfig& cfg) {
    JobSpec job;
    job.id = id;
    job.label = "MSJ";
    std::vector<std::string> names;
    for (const auto& e : eqs) {
        if (std::find(names.begin(), names.end(), e.output) != names.end())
            throw Error(ErrorCode::DuplicateOutputName, "equation output " + e.output + " occurs twice");
        names.push_back(e.output);
    }

    auto requesters = std::make_shared<std::vector<Requester>>();
    auto asserts = std::make_shared<std::vector<AssertSource>>();
    std::vector<std::string> sigs;
    for (const auto& e : eqs) {
        std::size_t gin = input_slot(job.inputs, e.guard.relation, "guard");
        std::vector<std::string> key = e.key();
        std::size_t cin = input_slot(job.inputs, e.cond.relation, "cond");
        Requester r;
        r.pattern = AtomPattern(e.guard);
        r.key_pos = r.pattern.positions(key);
        r.out_pos = r.pattern.positions(e.out_vars);
        r.assert_id = assert_slot(*asserts, sigs, e.cond, key, cin);
        r.input = gin;
        r.anti = e.anti;
        requesters->push_back(std::move(r));
        job.outputs.push_back({e.output, cfg.tuple_id ? 1 : e.out_vars.size()});
        job.bounds.push_back({job.outputs.size() - 1, e.guard.relation, e.guard, e.out_vars, cfg.tuple_id});
        job.equations.push_back(e.output + " := " + pretty_print(e.guard) + (e.anti ? " ANTI " : " SEMI ") +
                                pretty_print(e.cond));
    }

    bool packing = cfg.packing, tuple_id = cfg.tuple_id;
    job.map = [requesters, asserts, packing, tuple_id](const MapRecord& rec, MapEmitter& em) {
        FactMessages msgs;
        for (std::size_t e = 0; e < requesters->size(); ++e) {
            const Requester& r = (*requesters)[e];
            if (r.input != rec.input || !r.pattern.matches(rec.values))
                continue;
            std::string payload;
            if (tuple_id) {
                payload = encode_tuple_id(rec.file_id, rec.ordinal);
                em.note_output_bound(tuple_id_bytes(payload));
            } else {
                Tuple out = pick(rec.values, r.out_pos);
                em.note_output_bound(static_cast<double>(serialized_size(out)));
                payload = encode_key(out);
            }
            msgs.request(encode_key(pick(rec.values, r.key_pos)), {e, std::move(payload)});
        }
        for (std::size_t a = 0; a < asserts->size(); ++a) {
            const AssertSource& s = (*asserts)[a];
            if (s.input == rec.input && s.pattern.matches(rec.values))
                msgs.assert_(encode_key(pick(rec.values, s.key_pos)), a);
        }
        msgs.flush(em, packing);
    };
    job.reduce = [requesters, tuple_id](std::string_view, const std::vector<std::string>& values, ReduceEmitter& em) {
        DecodedMessages msgs;
        for (const auto& v : values)
            decode_message(v, msgs);
        std::sort(msgs.asserts.begin(), msgs.asserts.end());
        for (auto& req : msgs.requests) {
            if (req.equation >= requesters->size())
                throw Error(ErrorCode::MalformedMessage, "request for unknown equation " + std::to_string(req.equation));
            const Requester& r = (*requesters)[req.equation];
            bool asserted = std::binary_search(msgs.asserts.begin(), msgs.asserts.end(), r.assert_id);
            if (asserted == r.anti)
                continue;
            em.emit(req.equation, tuple_id ? Tuple{std::move(req.payload)} : decode_key(req.payload));
        }
    };
    return job;
}

JobSpec build_eval_job(const std::string& id, const std::vector<EvalEntry>& entries, const OperatorConfig& cfg) {
    JobSpec job;
    job.id = id;
    job.label = "EVAL";

    struct Entry {
        AtomPattern pattern;
        std::vector<std::size_t> gvar_pos; // guard positions of the key variables
        std::vector<std::size_t> out_pos;  // in the fact (tuple-id mode) or the key tuple
        std::size_t guard_input = 0;
        std::uint64_t guard_id = 0;
        std::vector<std::uint64_t> var_ids;
        FormulaPtr phi;
    };
    struct Source {
        std::size_t input;
        std::uint64_t id;
    };
    auto table = std::make_shared<std::vector<Entry>>();
    auto sources = std::make_shared<std::vector<Source>>();
    std::vector<std::string> used;
    std::uint64_t next_id = 0;

    for (const auto& en : entries) {
        Entry e;
        e.pattern = AtomPattern(en.guard);
        std::vector<std::string> gvars = en.guard.variables();
        e.gvar_pos = e.pattern.positions(gvars);
        if (cfg.tuple_id) {
            e.out_pos = e.pattern.positions(en.out_vars);
        } else {
            for (const auto& v : en.out_vars)
                e.out_pos.push_back(static_cast<std::size_t>(std::find(gvars.begin(), gvars.end(), v) - gvars.begin()));
        }
        e.guard_input = input_slot(job.inputs, en.guard.relation, "guard");
        e.guard_id = next_id++;
        for (const auto& x : en.inputs) {
            if (std::find(used.begin(), used.end(), x) != used.end())
                throw Error(ErrorCode::OverlappingFormulaVariables, "relation " + x + " used by two formulas");
            used.push_back(x);
            std::uint64_t xid = next_id++;
            e.var_ids.push_back(xid);
            sources->push_back({input_slot(job.inputs, x, "semijoin"), xid});
        }
        if (en.phi)
            for (auto v : en.phi->variables())
                if (v >= en.inputs.size())
                    throw Error(ErrorCode::InvalidPlan, "formula variable without input relation");
        e.phi = en.phi;
        table->push_back(std::move(e));
        job.outputs.push_back({en.output, en.out_vars.size()});
        job.bounds.push_back({job.outputs.size() - 1, en.guard.relation, en.guard, en.out_vars, false});
        job.equations.push_back(en.output + " := " + pretty_print(en.guard) + " AND " +
                                (en.phi ? en.phi->to_string(en.inputs) : "TRUE"));
    }

    bool tuple_id = cfg.tuple_id;
    job.map = [table, sources, tuple_id](const MapRecord& rec, MapEmitter& em) {
        for (const auto& e : *table) {
            if (e.guard_input != rec.input || !e.pattern.matches(rec.values))
                continue;
            std::string value;
            put_varint(value, e.guard_id);
            if (tuple_id) {
                Tuple out = pick(rec.values, e.out_pos);
                em.note_output_bound(static_cast<double>(serialized_size(out)));
                value += encode_key(out);
                em.emit(encode_tuple_id(rec.file_id, rec.ordinal), std::move(value));
            } else {
                em.note_output_bound(static_cast<double>(serialized_size(pick(pick(rec.values, e.gvar_pos), e.out_pos))));
                em.emit(encode_key(pick(rec.values, e.gvar_pos)), std::move(value));
            }
        }
        for (const auto& s : *sources) {
            if (s.input != rec.input)
                continue;
            std::string value;
            put_varint(value, s.id);
            em.emit(tuple_id ? rec.values.at(0) : encode_key(rec.values), std::move(value));
        }
    };
    job.reduce = [table, tuple_id](std::string_view key, const std::vector<std::string>& values, ReduceEmitter& em) {
        std::vector<std::uint64_t> present;
        std::map<std::uint64_t, std::string> payloads;
        for (const auto& v : values) {
            std::size_t pos = 0;
            std::uint64_t id = get_varint(v, pos);
            present.push_back(id);
            if (pos < v.size())
                payloads.emplace(id, v.substr(pos));
        }
        std::sort(present.begin(), present.end());
        auto has = [&](std::uint64_t id) { return std::binary_search(present.begin(), present.end(), id); };
        Tuple key_tuple;
        bool decoded = false;
        for (std::size_t j = 0; j < table->size(); ++j) {
            const Entry& e = (*table)[j];
            if (!has(e.guard_id))
                continue;
            if (e.phi && !e.phi->evaluate([&](std::size_t k) { return has(e.var_ids[k]); }))
                continue;
            if (tuple_id) {
                auto it = payloads.find(e.guard_id);
                if (it == payloads.end())
                    throw Error(ErrorCode::MalformedMessage, "guard message without tuple payload");
                em.emit(j, decode_key(it->second));
            } else {
                if (!decoded) {
                    key_tuple = decode_key(key);
                    decoded = true;
                }
                em.emit(j, pick(key_tuple, e.out_pos));
            }
        }
    };
    return job;
}

bool one_round_eligible(const BsgfQuery& q) {
    if (!q.condition)
        return false;
    std::vector<Atom> atoms = q.conditional_atoms();
    std::vector<std::string> first = join_key(q.guard, atoms.front());
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return join_key(q.guard, a) == first; });
}

JobSpec build_one_round_job(const std::string& id, const BsgfQuery& q, const OperatorConfig& cfg) {
    if (!one_round_eligible(q))
        throw Error(ErrorCode::NotEligible, "query " + q.output + ": conditional atoms do not share one join key");
    JobSpec job;
    job.id = id;
    job.label = "ONE_ROUND";
    std::vector<Atom> atoms = q.conditional_atoms();
    std::vector<std::string> key = join_key(q.guard, atoms.front());

    struct Plan {
        AtomPattern guard;
        std::vector<std::size_t> key_pos, out_pos;
        std::size_t guard_input = 0;
        std::vector<AssertSource> asserts;
        std::vector<std::size_t> atom_assert; // conditional atom -> assert id
        FormulaPtr phi;
    };
    auto plan = std::make_shared<Plan>();
    plan->guard = AtomPattern(q.guard);
    plan->key_pos = plan->guard.positions(key);
    plan->out_pos = plan->guard.positions(q.out_vars);
    plan->guard_input = input_slot(job.inputs, q.guard.relation, "guard");
    std::vector<std::string> sigs;
    for (const auto& a : atoms)
        plan->atom_assert.push_back(
            assert_slot(plan->asserts, sigs, a, key, input_slot(job.inputs, a.relation, "cond")));
    plan->phi = formula_from(q.condition, atoms);
    job.outputs.push_back({q.output, q.out_vars.size()});
    job.bounds.push_back({0, q.guard.relation, q.guard, q.out_vars, false});
    job.equations.push_back(pretty_print(q));

    bool packing = cfg.packing;
    job.map = [plan, packing](const MapRecord& rec, MapEmitter& em) {
        FactMessages msgs;
        if (rec.input == plan->guard_input && plan->guard.matches(rec.values)) {
            Tuple out = pick(rec.values, plan->out_pos);
            em.note_output_bound(static_cast<double>(serialized_size(out)));
            msgs.request(encode_key(pick(rec.values, plan->key_pos)), {0, encode_key(out)});
        }
        for (std::size_t a = 0; a < plan->asserts.size(); ++a) {
            const AssertSource& s = plan->asserts[a];
            if (s.input == rec.input && s.pattern.matches(rec.values))
                msgs.assert_(encode_key(pick(rec.values, s.key_pos)), a);
        }
        msgs.flush(em, packing);
    };
    job.reduce = [plan](std::string_view, const std::vector<std::string>& values, ReduceEmitter& em) {
        DecodedMessages msgs;
        for (const auto& v : values)
            decode_message(v, msgs);
        if (msgs.requests.empty())
            return;
        std::sort(msgs.asserts.begin(), msgs.asserts.end());
        bool holds = plan->phi->evaluate([&](std::size_t k) {
            return std::binary_search(msgs.asserts.begin(), msgs.asserts.end(), plan->atom_assert[k]);
        });
        if (!holds)
            return;
        for (const auto& r : msgs.requests)
            em.emit(0, decode_key(r.payload));
    };
    return job;
}

JobSpec build_projection_job(const std::string& id, const BsgfQuery& q) {
    JobSpec job;
    job.id = id;
    job.label = "PROJECT";
    job.map_only = true;
    job.inputs.push_back({q.guard.relation, "guard"});
    job.outputs.push_back({q.output, q.out_vars.size()});
    job.bounds.push_back({0, q.guard.relation, q.guard, q.out_vars, false});
    job.equations.push_back(pretty_print(q));
    auto pattern = std::make_shared<AtomPattern>(q.guard);
    auto out_pos = std::make_shared<std::vector<std::size_t>>(pattern->positions(q.out_vars));
    job.map = [pattern, out_pos](const MapRecord& rec, MapEmitter& em) {
        if (!pattern->matches(rec.values))
            return;
        Tuple out = pick(rec.values, *out_pos);
        em.note_output_bound(static_cast<double>(serialized_size(out)));
        em.write(0, std::move(out));
    };
    return job;
}

} // namespace sgf
