from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('subcommand', models.CharField(choices=[('bogoliubov', 'bogoliubov'), ('contour', 'contour'), ('twa', 'twa'), ('hoc', 'hoc'), ('hc_compare', 'hc_compare'), ('disorder', 'disorder'), ('observables', 'observables')], max_length=20)),
                ('config', models.TextField()),
                ('seed', models.BigIntegerField(default=0)),
                ('deterministic', models.BooleanField(default=False)),
                ('exit_code', models.IntegerField(default=0)),
                ('summary', models.TextField(blank=True, default='')),
                ('code_version', models.CharField(max_length=40)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('wall_time', models.FloatField(blank=True, null=True)),
            ],
        ),
        migrations.CreateModel(
            name='RunArtifact',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('path', models.CharField(max_length=500)),
                ('kind', models.CharField(choices=[('csv', 'Table'), ('json', 'Summary')], max_length=4)),
                ('written_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='artifacts', to='runs.runrecord')),
            ],
        ),
    ]
