#pragma once

// Reference model specs, mirrored byte-for-byte in specs/*.spec.

#include "mixlogit/modelspec.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mixlogit {

inline const std::map<std::string, std::string, std::less<>>& bundled_spec_texts()
{
    static const std::map<std::string, std::string, std::less<>> texts = {
        {"paper_cmnl", R"SPEC(# Joint housing / commute-mode choice with fixed coefficients only.
model = CMNL
name = paper_cmnl

[coefficients]
hcost_owner: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=owner
hcost_renter: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=renter
rooms: attribute=h_rooms applies=housing kind=fixed
separate: attribute=h_separate applies=housing kind=fixed
single_family: attribute=h_single_family applies=housing kind=fixed
old15: attribute=h_old15 applies=housing kind=fixed
services: attribute=h_services_any applies=housing kind=fixed
walk10: attribute=h_walk10 applies=housing kind=fixed
travel_cost: attribute=m_cost applies=modes kind=fixed transform=neg_exp
time_car: attribute=m_time applies=mode:1 kind=fixed
time_sdc: attribute=m_time applies=mode:2 kind=fixed
time_pt: attribute=m_time applies=mode:3 kind=fixed
# sensitivity to the negative of the congested share enters exponentially
congestion: attribute=m_congestion applies=mode:1,2 kind=fixed transform=exp scale=-1

[intercepts]
asc_sdc: mode=2 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
asc_pt: mode=3 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
)SPEC"},
        {"paper_ecmnl", R"SPEC(# Joint housing / commute-mode choice with mode-nest error components.
model = ECMNL
name = paper_ecmnl

[coefficients]
hcost_owner: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=owner
hcost_renter: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=renter
rooms: attribute=h_rooms applies=housing kind=fixed
separate: attribute=h_separate applies=housing kind=fixed
single_family: attribute=h_single_family applies=housing kind=fixed
old15: attribute=h_old15 applies=housing kind=fixed
services: attribute=h_services_any applies=housing kind=fixed
walk10: attribute=h_walk10 applies=housing kind=fixed
travel_cost: attribute=m_cost applies=modes kind=fixed transform=neg_exp
time_car: attribute=m_time applies=mode:1 kind=fixed
time_sdc: attribute=m_time applies=mode:2 kind=fixed
time_pt: attribute=m_time applies=mode:3 kind=fixed
# sensitivity to the negative of the congested share enters exponentially
congestion: attribute=m_congestion applies=mode:1,2 kind=fixed transform=exp scale=-1

[error_components]
ec_car: mode=1
ec_sdc: mode=2
ec_pt: mode=3

[intercepts]
asc_sdc: mode=2 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
asc_pt: mode=3 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
)SPEC"},
        {"paper_mmnl1", R"SPEC(# Joint housing / commute-mode choice with independent random sensitivities.
model = MMNL1
name = paper_mmnl1

[coefficients]
hcost_owner: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=owner
hcost_renter: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=renter
rooms: attribute=h_rooms applies=housing kind=random
separate: attribute=h_separate applies=housing kind=random
single_family: attribute=h_single_family applies=housing kind=fixed
old15: attribute=h_old15 applies=housing kind=fixed
services: attribute=h_services_any applies=housing kind=fixed
walk10: attribute=h_walk10 applies=housing kind=fixed
travel_cost: attribute=m_cost applies=modes kind=fixed transform=neg_exp
time_car: attribute=m_time applies=mode:1 kind=random
time_sdc: attribute=m_time applies=mode:2 kind=random
time_pt: attribute=m_time applies=mode:3 kind=random
# log-normal sensitivity to the negative of the congested share
congestion: attribute=m_congestion applies=mode:1,2 kind=random transform=exp scale=-1

[error_components]
ec_car: mode=1
ec_sdc: mode=2
ec_pt: mode=3

[intercepts]
asc_sdc: mode=2 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
asc_pt: mode=3 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
)SPEC"},
        {"paper_mmnl2", R"SPEC(# Joint housing / commute-mode choice with correlated travel-time sensitivities.
model = MMNL2
name = paper_mmnl2

[coefficients]
hcost_owner: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=owner
hcost_renter: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=renter
rooms: attribute=h_rooms applies=housing kind=random
separate: attribute=h_separate applies=housing kind=random
single_family: attribute=h_single_family applies=housing kind=fixed
old15: attribute=h_old15 applies=housing kind=fixed
services: attribute=h_services_any applies=housing kind=fixed
walk10: attribute=h_walk10 applies=housing kind=fixed
travel_cost: attribute=m_cost applies=modes kind=fixed transform=neg_exp
time_car: attribute=m_time applies=mode:1 kind=random
time_sdc: attribute=m_time applies=mode:2 kind=random
time_pt: attribute=m_time applies=mode:3 kind=random
# log-normal sensitivity to the negative of the congested share
congestion: attribute=m_congestion applies=mode:1,2 kind=random transform=exp scale=-1

[error_components]
ec_car: mode=1
ec_sdc: mode=2
ec_pt: mode=3

[blocks]
time: members=time_car,time_sdc,time_pt

[intercepts]
asc_sdc: mode=2 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
asc_pt: mode=3 covariates=female,age_18_29,age_50_plus,children,degree,ridehail
)SPEC"},
    };
    return texts;
}

inline std::optional<ModelSpec> bundled_spec(std::string_view name)
{
    const auto& texts = bundled_spec_texts();
    auto it = texts.find(name);
    if (it == texts.end()) return std::nullopt;
    return parse_spec_text(it->second, std::string(name));
}

/// Resolves a bundled spec name, falling back to a file path.
inline ModelSpec load_spec(const std::string& name_or_path)
{
    if (auto s = bundled_spec(name_or_path)) return *s;
    return parse_spec(name_or_path);
}

} // namespace mixlogit
