from algorithms.games import RepeatedGame, game_value_bruteforce, load_game, make_ghz_game


def load_game_arg(text):
    """Ruta a un juego en JSON, o 'ghz'."""
    if not text or text == 'ghz':
        return make_ghz_game()
    return load_game(text)


class GameValue:
    def __init__(self):
        pass

    def solve_game(self, config, helper):
        p = config.params
        game = load_game_arg(p.get('game'))
        reps = int(p.get('reps') or 1)
        value, witness = game_value_bruteforce(game)
        result = {'game': game.name, 'reps': reps, 'base_value': value,
                  'base_witness': witness.to_dict()}
        if reps > 1:
            repeated = RepeatedGame(game, reps).materialize()
            rep_value, rep_witness = game_value_bruteforce(repeated)
            result['value'] = rep_value
            result['witness'] = rep_witness.to_dict()
            result['sandwich'] = {'lower': value ** reps, 'upper': value,
                                  'holds': value ** reps <= rep_value <= value}
            return result, None, str(rep_value)
        result['value'] = value
        return result, None, str(value)
