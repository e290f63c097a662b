"""
Single-page HTML view of a run: headline metrics, distributions and the
per-job table. Templates live in memory; nothing is read from disk.
"""

from typing import Any, Dict

from jinja2 import DictLoader, Environment, select_autoescape

from database.models import MetricsReport
from utils.file_utils import format_number

DEFAULT_TEMPLATES = {
    'base.html': '''<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>{% block title %}Simulation report{% endblock %}</title>
    <style>
        body { font-family: Arial, sans-serif; max-width: 1100px; margin: 0 auto; padding: 20px; }
        table { border-collapse: collapse; margin: 15px 0; }
        th, td { border: 1px solid #ddd; padding: 4px 10px; text-align: right; }
        th { background: #f4f4f4; }
        td.id, th.id { text-align: left; }
        .meta { color: #666; font-size: 0.9em; }
    </style>
</head>
<body>
    {% block content %}{% endblock %}
</body>
</html>''',

    'run.html': '''{% extends "base.html" %}
{% block title %}{{ summary.policy }} on {{ summary.num_racks }} racks (seed {{ summary.seed }}){% endblock %}
{% block content %}
<h1>{{ summary.policy }}</h1>
<p class="meta">{{ summary.num_jobs }} jobs, {{ summary.total_gpus }} GPUs in {{ summary.num_racks }} racks,
seed {{ summary.seed }}. Percentiles: {{ summary.percentile_method }}.</p>

<h2>Headline</h2>
<table>
    <tr><th class="id">Makespan (s)</th><td>{{ num(summary.makespan) }}</td></tr>
    <tr><th class="id">Mean utilization</th><td>{{ num(summary.mean_utilization) }}</td></tr>
    <tr><th class="id">Estimated cost (USD)</th><td>{{ num(summary.cost_estimate_usd) }}</td></tr>
    <tr><th class="id">Preemptions</th><td>{{ summary.total_preemptions }}</td></tr>
    <tr><th class="id">Migrations</th><td>{{ summary.total_migrations }}</td></tr>
    {% for tier, count in summary.tier_segments.items() %}
    <tr><th class="id">Segments on {{ tier }} tier</th><td>{{ count }}</td></tr>
    {% endfor %}
</table>

<h2>Distributions (s)</h2>
<table>
    <tr><th class="id">Metric</th><th>Mean</th><th>Median</th><th>P95</th><th>P99</th></tr>
    {% for label, stats in distributions %}
    <tr><td class="id">{{ label }}</td><td>{{ num(stats.mean) }}</td><td>{{ num(stats.median) }}</td>
        <td>{{ num(stats.p95) }}</td><td>{{ num(stats.p99) }}</td></tr>
    {% endfor %}
</table>

<h2>Jobs</h2>
<table>
    <tr><th class="id">Job</th><th class="id">Model</th><th>GPUs</th><th>Arrival</th><th>JCT</th>
        <th>Queueing</th><th>Comm</th><th>Preempted</th><th class="id">Tiers</th></tr>
    {% for job in jobs %}
    <tr><td class="id">{{ job.job_id }}</td><td class="id">{{ job.model_name }}</td><td>{{ job.gpu_demand }}</td>
        <td>{{ num(job.arrival) }}</td><td>{{ num(job.jct) }}</td><td>{{ num(job.queueing_delay) }}</td>
        <td>{{ num(job.comm_latency_total) }}</td><td>{{ job.num_preemptions }}</td>
        <td class="id">{% for _, tier in job.final_tier_history %}{{ tier }}{% if not loop.last %} &gt; {% endif %}{% endfor %}</td></tr>
    {% endfor %}
</table>
{% endblock %}''',
}


class ReportRenderer:
    def __init__(self, templates: Dict[str, str] = None):
        self.env = Environment(
            loader=DictLoader(templates or DEFAULT_TEMPLATES),
            autoescape=select_autoescape(['html']),
        )
        self.env.globals['num'] = format_number

    def render_page(self, template_name: str, context: Dict[str, Any]) -> str:
        return self.env.get_template(template_name).render(**context)


def render_report(report: MetricsReport) -> str:
    summary = report.summary()
    return ReportRenderer().render_page('run.html', {
        'summary': summary,
        'distributions': [
            ("Job completion time", report.jct_stats),
            ("Queueing delay", report.queueing_stats),
            ("Communication latency", report.comm_latency_stats),
        ],
        'jobs': report.jobs,
    })
