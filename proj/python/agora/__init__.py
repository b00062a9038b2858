"""Multi-agent political debate simulation and bias analysis."""

from ._agora import (  # noqa: F401
    PersonaSpec,
    Scenario,
    __version__,
    analyze_experiments,
    build_enhanced_generation_prompt,
    build_enhanced_persona,
    build_gender_curation_prompt,
    build_simple_persona,
    compare_series,
    compose_scenario,
    default_battery,
    get_scenario,
    levene_test,
    linear_gradient,
    load_scores,
    one_way_anova,
    parse_likert,
    render_judge_prompt,
    reversion_ratio,
    run_experiment,
    score_experiment,
    topics,
)
