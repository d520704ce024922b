// implementation forthcoming
